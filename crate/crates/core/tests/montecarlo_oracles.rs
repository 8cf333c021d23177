//! The samplers against the analytic distributions, and the estimators
//! against the closed forms.

use rfso_core::analytics::*;
use rfso_core::fso_channel::*;
use rfso_core::hardware::*;
use rfso_core::montecarlo::*;
use rfso_core::rf_channel::*;
use rfso_core::sndr::Protocol;
use rfso_core::db_to_linear;

fn hop(r: u32, xi: f64) -> FsoHop {
    let pp = PointingPathParams { xi, a0: 1.0, sigma_atten: 0.0, l_km: 1.0 };
    FsoHop::new(&MalagaParams::reference(), pp, DetectionParams { r, mu_r: 1.0 }).unwrap()
}

fn link(p: Protocol, hw: HardwareProfile, r: u32, db: f64) -> LinkConfig {
    let rf = RfHopParams::new(1.0, 3, 3, 0.7).unwrap();
    LinkConfig::new(rf, hop(r, 0.7), hw, p).unwrap().with_snr_db(db)
}

fn agg() -> HardwareProfile {
    HardwareProfile::aggregate(0.3, 0.3).unwrap()
}

#[test]
fn fully_correlated_best_relay_is_the_maximum_of_exponentials() {
    let p = RfHopParams::new(1.0, 4, 4, 1.0).unwrap();
    let d = draw_gamma1(&p, 11, 1_000_000).unwrap();
    let (_, hi) = ks_distance(d, |g| Ok((-(-g).exp_m1()).powi(4)), 4000).unwrap();
    assert!(hi <= 5e-3, "{hi}");
}

#[test]
fn selected_relay_matches_its_density() {
    let p = RfHopParams::new(1.0, 3, 3, 0.7).unwrap();
    let d = draw_gamma1(&p, 12, 1_000_000).unwrap();
    let (_, pval) = chi_square_gamma1(&p, &d, 50).unwrap();
    assert!(pval > 0.01, "p = {pval}");
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    assert!((mean / mean_gamma1(&p) - 1.0).abs() < 0.01);
}

#[test]
fn optical_draws_match_the_analytic_cdf() {
    for (r, xi) in [(1, 0.7), (2, 0.7), (2, 0.4)] {
        let h = hop(r, xi);
        let d = draw_gamma2(&h, 13, 1_000_000).unwrap();
        let (_, hi) = ks_distance(d, |g| cdf_gamma2(&h, g), 2000).unwrap();
        assert!(hi <= 5e-3, "r={r} ξ={xi}: D ≤ {hi}");
    }
}

#[test]
fn optical_mean_matches_and_calibration_passes() {
    for r in [1, 2] {
        let dev = check_calibration(&hop(r, 0.7), 14, 1_000_000).unwrap();
        assert!(dev.abs() < 0.01, "r={r}: {dev}");
    }
    // heterodyne: the second moment is light-tailed enough to check here
    let m = gamma2_moments(&hop(1, 0.7), &[2.0], 15, 1_000_000).unwrap()[0];
    assert!((m / moment_gamma2(&hop(1, 0.7), 2.0).unwrap() - 1.0).abs() < 0.01, "{m}");
}

#[test]
fn negligible_jitter_removes_the_pointing_factor() {
    // ξ → ∞: I_p/A₀ → 1, Î = X·Y/E[XY]
    let h = hop(1, 1e4);
    let s = FsoSampler::new(&h).unwrap();
    let a: Vec<f64> = (0..1000).map(|i| s.sample_irradiance(&mut stream(5, i))).collect();
    let m = h.malaga.mean_ia();
    let pp0 = FsoSampler::new(&hop(1, 1e8)).unwrap();
    let b: Vec<f64> = (0..1000).map(|i| pp0.sample_irradiance(&mut stream(5, i))).collect();
    for (x, y) in a.iter().zip(&b) {
        assert!((x / y - 1.0).abs() < 1e-6, "{x} {y} (E[I_a] = {m})");
    }
}

#[test]
fn outage_estimate_matches_the_closed_form() {
    let cfg = link(Protocol::Af, agg(), 2, 20.0);
    let t = db_to_linear(7.0);
    let e = estimate(Metric::Op { gamma_th: t }, &cfg, &SimConfig::new(21, 1_000_000)).unwrap();
    let a = outage_af(&cfg, t).unwrap();
    assert!(e.z_score(a) <= 3.0, "{e:?} vs {a}");
    assert!(e.ci95_lo < e.value && e.value < e.ci95_hi);
    assert!((e.ci95_hi - e.value - 1.96 * e.stderr).abs() < 1e-15);
}

#[test]
fn semi_analytic_sep_has_small_variance() {
    let cfg = link(Protocol::Af, HardwareProfile::Ideal, 1, 20.0);
    let e = estimate(Metric::Sep { c: 2.0 }, &cfg, &SimConfig::new(22, 1_000_000)).unwrap();
    assert!(e.stderr < 1e-4, "{}", e.stderr);
    assert!(e.z_score(sep_af_ideal_closed(&cfg, 2.0).unwrap()) <= 3.0);
}

#[test]
fn stderr_scales_as_inverse_root_n() {
    let cfg = link(Protocol::Df, agg(), 1, 15.0);
    let m = Metric::Ec { varpi: 1.0 };
    let a = estimate(m, &cfg, &SimConfig::new(23, 200_000)).unwrap();
    let b = estimate(m, &cfg, &SimConfig::new(23, 800_000)).unwrap();
    let ratio = a.stderr / b.stderr;
    assert!((ratio / 2.0 - 1.0).abs() < 0.2, "{ratio}");
}

#[test]
fn sampled_sndr_respects_the_ceiling() {
    for p in [Protocol::Af, Protocol::Df] {
        let cfg = link(p, agg(), 2, 60.0);
        let e = estimate(Metric::Ec { varpi: 1.0 }, &cfg, &SimConfig::new(24, 200_000)).unwrap();
        assert!(e.sndr_max < cfg.sndr_ceiling(), "{p}: {} vs {}", e.sndr_max, cfg.sndr_ceiling());
    }
}

#[test]
fn common_random_numbers_across_probes() {
    let base = link(Protocol::Af, agg(), 2, 0.0);
    let sim = SimConfig::new(25, 50_000);
    let probes: Vec<Probe> = [10.0, 20.0]
        .iter()
        .map(|&db| Probe { cfg: base.with_snr_db(db), metric: Metric::Op { gamma_th: 2.0 } })
        .collect();
    let both = estimate_many(&probes, &sim).unwrap();
    let one = estimate(probes[1].metric, &probes[1].cfg, &sim).unwrap();
    assert_eq!(both[1], one);
    // pathwise monotone in SNR, so the paired estimates are ordered exactly
    assert!(both[1].value <= both[0].value);
}

#[test]
fn ideal_link_passes_the_validation_suite() {
    let cfg = link(Protocol::Af, HardwareProfile::Ideal, 1, 0.0);
    let r = validate(&cfg, &SimConfig::new(26, 1_000_000), &Tolerances::default(), &ValidationPlan::default());
    assert!(r.passed(), "{}", r.render());
}

#[test]
fn perturbed_turbulence_is_caught() {
    // weak pointing error, so the irradiance law is turbulence-dominated
    let rf = RfHopParams::new(1.0, 3, 3, 0.7).unwrap();
    let cfg = LinkConfig::new(rf, hop(2, 6.7), HardwareProfile::Ideal, Protocol::Af).unwrap();
    let mut wrong = MalagaParams::reference();
    wrong.alpha *= 1.1;
    let fso = FsoHop::new(&wrong, cfg.fso.pp, cfg.fso.det).unwrap();
    let analytic = LinkConfig { fso, ..cfg.clone() };
    let plan = ValidationPlan { dist_samples: 1_000_000, grid_db: vec![10.0], ..ValidationPlan::default() };
    let r = validate_against(&cfg, &analytic, &SimConfig::new(27, 1_000_000), &Tolerances::default(), &plan);
    let ks = r.checks.iter().find(|c| c.name == "gamma2 KS").unwrap();
    assert_eq!(ks.status, Status::Fail, "{}", r.render());
    assert!(!r.passed());
}

#[test]
fn perturbed_turbulence_under_strong_pointing_error_shows_in_the_moments() {
    let cfg = link(Protocol::Af, HardwareProfile::Ideal, 2, 0.0);
    let mut wrong = MalagaParams::reference();
    wrong.alpha *= 1.1;
    let fso = FsoHop::new(&wrong, cfg.fso.pp, cfg.fso.det).unwrap();
    let analytic = LinkConfig { fso, ..cfg.clone() };
    let plan = ValidationPlan { dist_samples: 200_000, grid_db: vec![], ..ValidationPlan::default() };
    let r = validate_against(&cfg, &analytic, &SimConfig::new(27, 1_000_000), &Tolerances::default(), &plan);
    assert!(r.failures().any(|c| c.name.starts_with("gamma2 moment")), "{}", r.render());
}

//! First- and second-hop statistics checked against quadrature of their own
//! densities and against the literal per-term Meijer-G sums.

mod common;

use common::{simpson, simpson_log};
use proptest::prelude::*;
use rfso_core::fso_channel::*;
use rfso_core::rf_channel::*;

fn hop(r: u32, xi: f64, mu: f64) -> FsoHop {
    let pp = PointingPathParams { xi, a0: 1.0, sigma_atten: 0.0, l_km: 1.0 };
    FsoHop::new(&MalagaParams::reference(), pp, DetectionParams { r, mu_r: mu }).unwrap()
}

#[test]
fn rf_density_integrates_to_one_and_has_the_right_mean() {
    let p = RfHopParams::new(10.0, 3, 2, 0.7).unwrap();
    let total = simpson(|g| pdf_gamma1(&p, g), 0.0, 600.0, 6000);
    assert!((total - 1.0).abs() < 1e-8, "{total}");
    let mean = simpson(|g| g * pdf_gamma1(&p, g), 0.0, 600.0, 6000);
    assert!((mean / mean_gamma1(&p) - 1.0).abs() < 1e-6);
}

#[test]
fn rf_density_is_derivative_of_cdf() {
    let p = RfHopParams::new(3.0, 3, 3, 0.7).unwrap();
    for i in 0..30 {
        let g = 1e-3 * 10f64.powf(i as f64 / 6.0);
        let h = 1e-5 * g;
        let d = if cdf_gamma1(&p, g) < 0.5 {
            (cdf_gamma1(&p, g + h) - cdf_gamma1(&p, g - h)) / (2.0 * h)
        } else {
            (ccdf_gamma1(&p, g - h) - ccdf_gamma1(&p, g + h)) / (2.0 * h)
        };
        assert!((d / pdf_gamma1(&p, g) - 1.0).abs() < 1e-5, "γ={g}");
    }
    let h = 1e-7;
    assert!((cdf_gamma1(&p, h) / h - pdf_gamma1(&p, 0.0)).abs() < 1e-6);
}

#[test]
fn rf_mean_grows_with_rank() {
    let means: Vec<f64> = (1..=5).map(|m| mean_gamma1(&RfHopParams::new(1.0, 5, m, 0.4).unwrap())).collect();
    assert!(means.windows(2).all(|w| w[1] >= w[0]), "{means:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn rf_cdf_is_monotone(big_m in 1u32..8, frac in 0.0f64..1.0, rho in 0.0f64..=1.0, mu in 0.1f64..100.0) {
        let m = 1 + ((big_m as f64 - 1.0) * frac).round() as u32;
        let p = RfHopParams::new(mu, big_m, m, rho).unwrap();
        let mut last = 0.0;
        for i in 0..60 {
            let g = mu * 1e-4 * 1.3f64.powi(i);
            let f = cdf_gamma1(&p, g);
            prop_assert!(f >= last * (1.0 - 1e-13) && f <= 1.0, "γ={} F={} prev={}", g, f, last);
            last = f;
        }
    }
}

#[test]
fn malaga_turbulence_density_normalises_with_unit_scale_mean() {
    let d = derive_malaga(&MalagaParams::reference()).unwrap();
    let f = |i: f64| pdf_ia(&d, i).unwrap();
    let total = simpson_log(f, 1e-9, 200.0, 4000);
    assert!((total - 1.0).abs() < 1e-7, "{total}");
    let mean = simpson_log(|i| i * f(i), 1e-9, 200.0, 4000);
    assert!((mean / d.mean_ia() - 1.0).abs() < 1e-7, "{mean}");
    for k in 0..=48 {
        assert!(f(1e-6 * 10f64.powf(k as f64 / 6.0)) >= 0.0);
    }
}

#[test]
fn snr_density_normalises_over_the_test_grid() {
    for r in [1, 2] {
        for xi in [0.2, 0.4, 0.7, 0.9, 6.7] {
            let h = hop(r, xi, 1.0);
            let (lo, hi) = (1e-10, 1e8);
            let body = simpson_log(|g| pdf_gamma2(&h, g).unwrap(), lo, hi, 3000);
            // tails from the literal Meijer-G CDF (negligible except for tiny ξ²/r)
            let tails = cdf_gamma2_termwise(&h, lo).unwrap() + (1.0 - cdf_gamma2_termwise(&h, hi).unwrap());
            assert!((body + tails - 1.0).abs() < 1e-6, "r={r} ξ={xi}: {body} + {tails}");
        }
    }
}

#[test]
fn snr_moments_match_quadrature() {
    for (r, xi) in [(1, 0.7), (2, 0.7), (2, 6.7), (1, 1.5)] {
        let h = hop(r, xi, 3.0);
        // one density sweep serves all three orders
        let n = 4000;
        let (u0, u1) = (1e-10f64.ln(), 3e9f64.ln());
        let nodes: Vec<(f64, f64)> = (0..=n)
            .map(|i| {
                let g = (u0 + (u1 - u0) * i as f64 / n as f64).exp();
                (g, pdf_gamma2(&h, g).unwrap())
            })
            .collect();
        for k in [1.0, 2.0, 3.0] {
            let q = simpson(
                |u| {
                    let i = ((u - u0) / (u1 - u0) * n as f64).round() as usize;
                    let (g, p) = nodes[i];
                    g.powf(k + 1.0) * p
                },
                u0,
                u1,
                n,
            );
            let m = moment_gamma2(&h, k).unwrap();
            assert!((q / m - 1.0).abs() < 1e-5, "r={r} ξ={xi} k={k}: {q} vs {m}");
        }
    }
}

#[test]
fn heterodyne_mean_snr_is_mu() {
    for xi in [0.4, 0.7, 6.7] {
        let m = moment_gamma2(&hop(1, xi, 7.0), 1.0).unwrap();
        assert!((m / 7.0 - 1.0).abs() < 1e-12, "ξ={xi}: {m}");
    }
    let a = moment_gamma2(&hop(2, 0.7, 1.0), 2.0).unwrap();
    let b = moment_gamma2(&hop(2, 0.7, 2.0), 2.0).unwrap();
    assert!((b / a - 4.0).abs() < 1e-12);
}

#[test]
fn density_is_derivative_of_cdf() {
    for (r, xi) in [(1, 0.7), (2, 0.7), (2, 0.4)] {
        let h = hop(r, xi, 1.0);
        for i in 0..=24 {
            let g = 1e-4 * 10f64.powf(i as f64 / 4.0);
            let e = 1e-4 * g;
            let d = if cdf_gamma2(&h, g).unwrap() < 0.5 {
                (cdf_gamma2(&h, g + e).unwrap() - cdf_gamma2(&h, g - e).unwrap()) / (2.0 * e)
            } else {
                (ccdf_gamma2(&h, g - e).unwrap() - ccdf_gamma2(&h, g + e).unwrap()) / (2.0 * e)
            };
            let p = pdf_gamma2(&h, g).unwrap();
            assert!((d / p - 1.0).abs() < 1e-4, "r={r} ξ={xi} γ={g}: {d} vs {p}");
            assert!(p > 0.0);
        }
    }
}

#[test]
fn fused_density_matches_termwise_sum() {
    for (r, xi) in [(1, 0.7), (2, 0.9), (2, 6.7)] {
        let h = hop(r, xi, 2.0);
        for g in [1e-3, 0.05, 1.0, 20.0, 300.0] {
            let a = pdf_gamma2(&h, g).unwrap();
            let b = pdf_gamma2_termwise(&h, g).unwrap();
            assert!((a / b - 1.0).abs() < 1e-9, "r={r} ξ={xi} γ={g}");
        }
    }
}

#[test]
fn cdf_limits_and_scale_invariance() {
    let h = hop(2, 0.7, 5.0);
    assert_eq!(cdf_gamma2(&h, 0.0).unwrap(), 0.0);
    assert!(cdf_gamma2(&h, 5e6).unwrap() > 1.0 - 1e-4);
    for g in [0.01, 1.0, 30.0] {
        let a = cdf_gamma2(&h, g).unwrap();
        let b = cdf_gamma2(&h.with_mu_r(50.0), 10.0 * g).unwrap();
        assert!((a - b).abs() < 1e-12 * a.max(1e-3));
        let c = ccdf_gamma2(&h, g).unwrap();
        assert!((a + c - 1.0).abs() < 1e-10);
    }
    let mut last = 0.0;
    for i in 0..80 {
        let f = cdf_gamma2(&h, 1e-6 * 1.4f64.powi(i)).unwrap();
        assert!(f >= last);
        last = f;
    }
}

#[test]
fn small_argument_expansion_of_the_cdf_term_is_simple_and_close() {
    // CDF shape with the reference values: simple poles, strict expansion applies
    let h = hop(2, 0.7, 1.0);
    let spec = h.cdf_term_spec(1).unwrap();
    for z in [1e-5, 1e-4, 1e-3] {
        let exact = rfso_core::specfun::meijer_g(&spec, z).unwrap();
        let approx = rfso_core::specfun::meijer_g_small_arg(&spec, z).unwrap();
        assert!((approx / exact - 1.0).abs() < 1e-2, "z={z}");
    }
}

#[test]
fn reference_rytov_variance() {
    let g = derive_geometry(&GeometryParams::reference(0.3)).unwrap();
    let k = 2.0 * std::f64::consts::PI / 1550e-9;
    let expect = 1.23 * 2.8e-14 * k.powf(7.0 / 6.0) * 1000f64.powf(11.0 / 6.0);
    assert!((g.sigma_r2 / expect - 1.0).abs() < 1e-14);
    assert!((g.sigma_r2 - 0.557_467_228).abs() < 1e-6, "{}", g.sigma_r2);
}

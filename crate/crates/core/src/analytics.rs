//! Outage, symbol-error and capacity metrics of the two-hop link, their
//! high-SNR asymptotes, bounds and ceilings.
//!
//! Every AF metric starts from the conditional form of the SNDR CCDF
//!   F̄_γ(t) = Σ_k A_k·e^{−λ_k a t/μ₁}·E[exp(−λ_k b t/(μ₁γ₂))],
//! with (a, b) = ((1+κ₂²)/(1−δt), C/(1−δt)) for the aggregate model and
//! (κ, C) for a relay HPA. The expectation over γ₂ is a single Mellin–Barnes
//! line of the fused optical kernel Ψ; the literal per-term Meijer-G / Fox-H
//! sums are kept as `*_termwise` cross-checks.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::fso_channel::{cdf_gamma2, ccdf_gamma2, moment_gamma2, FsoHop, SnrKernel};
use crate::hardware::{aggregate_delta, link_constant, HardwareProfile, LinkConstants};
use crate::quad::{integrate_breaks, Quad};
use crate::rf_channel::{ccdf_gamma1, cdf_gamma1, mean_gamma1, ExpTerm, RfHopParams};
use crate::sndr::{self, Combiner, Protocol};
use crate::specfun::foxh::iterated_contour;
use crate::specfun::gamma::ln_gamma_c;
use crate::specfun::mellin::numeric_residue;
use crate::specfun::{
    delta_vec, fox_h_bivariate, gaussian_q, ln_gamma, meijer_g, meijer_g_head_expansion, ExpansionTerm, FoxH2Spec,
    MeijerGSpec,
};

/// Analytic probabilities further than this outside [0, 1] are errors.
const PROB_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkConfig {
    pub rf: RfHopParams,
    pub fso: FsoHop,
    pub hw: HardwareProfile,
    pub protocol: Protocol,
    /// Capacity scaling ϖ (1 heterodyne, e/2π IM/DD by default).
    pub varpi: f64,
}

impl LinkConfig {
    pub fn new(rf: RfHopParams, fso: FsoHop, hw: HardwareProfile, protocol: Protocol) -> Result<Self> {
        rf.validate()?;
        if protocol == Protocol::Df && matches!(hw, HardwareProfile::Hpa(_)) {
            return Err(Error::UnsupportedCombination(
                "DF relaying with a nonlinear relay amplifier is not modelled (HPA is AF-only)".into(),
            ));
        }
        let varpi = fso.det.default_varpi();
        Ok(LinkConfig { rf, fso, hw, protocol, varpi })
    }

    pub fn with_varpi(mut self, varpi: f64) -> Self {
        self.varpi = varpi;
        self
    }

    pub fn with_snr(&self, mu1: f64, mu_r: f64) -> Self {
        LinkConfig { rf: self.rf.with_mu1(mu1), fso: self.fso.with_mu_r(mu_r), ..self.clone() }
    }

    /// μ₁ = μ_r = 10^{dB/10}.
    pub fn with_snr_db(&self, db: f64) -> Self {
        let mu = crate::db_to_linear(db);
        self.with_snr(mu, mu)
    }

    /// C, E[γ₁] and κ, always recomputed from the current hop parameters.
    pub fn constants(&self) -> LinkConstants {
        link_constant(&self.rf, &self.hw)
    }

    pub fn combiner(&self) -> Result<Combiner> {
        Combiner::new(self.protocol, &self.hw, &self.constants())
    }

    pub fn sndr_ceiling(&self) -> f64 {
        sndr::ceiling(self.protocol, &self.hw)
    }

    fn require(&self, p: Protocol, what: &str) -> Result<()> {
        if self.protocol != p {
            return Err(Error::InvalidParameter(format!("{what} needs {p} relaying, config is {}", self.protocol)));
        }
        Ok(())
    }
}

fn probability(v: f64, what: &str) -> Result<f64> {
    if !(v >= -PROB_SLACK && v <= 1.0 + PROB_SLACK) {
        return Err(Error::AccuracyFailure { context: format!("{what} left [0, 1]: {v}"), estimate: f64::NAN });
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Per-threshold pieces of the AF conditional form.
struct AfForm {
    terms: Vec<ExpTerm>,
    mu1: f64,
    kernel: SnrKernel,
    lc: LinkConstants,
    hw: HardwareProfile,
}

impl AfForm {
    fn new(cfg: &LinkConfig) -> Self {
        AfForm {
            terms: cfg.rf.terms(),
            mu1: cfg.rf.mu1,
            kernel: cfg.fso.kernel(),
            lc: cfg.constants(),
            hw: cfg.hw,
        }
    }

    /// (a, b) at threshold t; None once t reaches the SNDR ceiling.
    fn coeffs(&self, t: f64) -> Option<(f64, f64)> {
        match self.hw {
            HardwareProfile::Ideal => Some((1.0, self.lc.c)),
            HardwareProfile::Aggregate { kappa1, kappa2 } => {
                let g = 1.0 - aggregate_delta(kappa1, kappa2) * t;
                (g > 0.0).then(|| ((1.0 + kappa2 * kappa2) / g, self.lc.c / g))
            }
            HardwareProfile::Hpa(_) => Some((self.lc.kappa, self.lc.c)),
        }
    }

    /// (x_k, y_k) = (λ_k a t/μ₁, λ_k b E t/(μ₁μ_r)).
    fn args(&self, term: &ExpTerm, a: f64, b: f64, t: f64) -> (f64, f64) {
        let x = term.rate * a * t / self.mu1;
        let y = term.rate * b * self.kernel.big_e * t / (self.mu1 * self.kernel.mu);
        (x, y)
    }

    fn cdf(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        let Some((a, b)) = self.coeffs(t) else { return Ok(1.0) };
        let mut acc = 0.0;
        for term in &self.terms {
            let (x, y) = self.args(term, a, b, t);
            acc += term.weight * (-(-x).exp_m1() + (-x).exp() * self.kernel.one_minus_exp_inverse_mean(y)?);
        }
        Ok(acc)
    }

    fn ccdf(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(1.0);
        }
        let Some((a, b)) = self.coeffs(t) else { return Ok(0.0) };
        let mut acc = 0.0;
        for term in &self.terms {
            let (x, y) = self.args(term, a, b, t);
            if x > 745.0 {
                continue;
            }
            acc += term.weight * (-x).exp() * self.kernel.exp_inverse_mean(y)?;
        }
        Ok(acc)
    }
}

/// Per-hop thresholds t/(1 − κᵢ²t) of the DF outage event; None past 1/κᵢ².
fn df_thresholds(cfg: &LinkConfig, t: f64) -> Option<(f64, f64)> {
    let (k1, k2) = cfg.hw.kappas();
    let (g1, g2) = (1.0 - k1 * k1 * t, 1.0 - k2 * k2 * t);
    (g1 > 0.0 && g2 > 0.0).then(|| (t / g1, t / g2))
}

/// P(γ ≤ t) for either protocol.
pub fn sndr_cdf(cfg: &LinkConfig, t: f64) -> Result<f64> {
    match cfg.protocol {
        Protocol::Af => outage_af(cfg, t),
        Protocol::Df => outage_df(cfg, t),
    }
}

/// P(γ > t) for either protocol, computed without 1 − F cancellation.
pub fn sndr_ccdf(cfg: &LinkConfig, t: f64) -> Result<f64> {
    if t.is_nan() {
        return Err(Error::Domain("threshold is NaN".into()));
    }
    let v = match cfg.protocol {
        Protocol::Af => AfForm::new(cfg).ccdf(t)?,
        Protocol::Df => {
            if t <= 0.0 {
                return Ok(1.0);
            }
            match df_thresholds(cfg, t) {
                None => 0.0,
                Some((t1, t2)) => ccdf_gamma1(&cfg.rf, t1) * ccdf_gamma2(&cfg.fso, t2)?,
            }
        }
    };
    probability(v, "SNDR CCDF")
}

pub fn outage_af(cfg: &LinkConfig, gamma_th: f64) -> Result<f64> {
    cfg.require(Protocol::Af, "outage_af")?;
    if gamma_th.is_nan() {
        return Err(Error::Domain("threshold is NaN".into()));
    }
    let v = AfForm::new(cfg).cdf(gamma_th).map_err(|e| e.context("AF outage"))?;
    probability(v, "AF outage")
}

/// The n-th Meijer-G term G^{3r+1,0}_{r,3r+1}(· | τ₅; τ₄) of the AF outage.
pub fn outage_term_spec(fso: &FsoHop, n: u32) -> Result<MeijerGSpec> {
    let (xi2, alpha, r) = (fso.pp.xi * fso.pp.xi, fso.malaga.params.alpha, fso.r() as usize);
    MeijerGSpec::new(3 * r + 1, 0, delta_vec(r, xi2 + 1.0), tau4(xi2, alpha, r, n))
}

fn tau4(xi2: f64, alpha: f64, r: usize, n: u32) -> Vec<f64> {
    let mut b = delta_vec(r, xi2);
    b.extend(delta_vec(r, alpha));
    b.extend(delta_vec(r, n as f64));
    b.push(0.0);
    b
}

/// Sum over (k, n) of A_k·e^{−x_k}·D·c_n·g_n(y_k) for a per-term function g_n.
fn af_termwise_sum<G>(cfg: &LinkConfig, gamma_th: f64, mut g: G) -> Result<Option<f64>>
where
    G: FnMut(u32, f64) -> Result<f64>,
{
    let form = AfForm::new(cfg);
    let Some((a, b)) = form.coeffs(gamma_th) else { return Ok(None) };
    let (xi, r) = (cfg.fso.pp.xi, cfg.fso.r());
    let d = cfg.fso.malaga.big_d(xi, r);
    let c_n = cfg.fso.malaga.c_n(r);
    let mut acc = 0.0;
    for term in &form.terms {
        let (x, y) = form.args(term, a, b, gamma_th);
        let mut inner = 0.0;
        for (i, c) in c_n.iter().enumerate() {
            inner += c * g(i as u32 + 1, y)?;
        }
        acc += term.weight * (-x).exp() * d * inner;
    }
    Ok(Some(acc))
}

/// AF outage as the literal double sum of Meijer-G terms.
pub fn outage_af_termwise(cfg: &LinkConfig, gamma_th: f64) -> Result<f64> {
    cfg.require(Protocol::Af, "outage_af_termwise")?;
    if gamma_th <= 0.0 {
        return Ok(0.0);
    }
    let specs: Vec<MeijerGSpec> =
        (1..=cfg.fso.malaga.params.beta).map(|n| outage_term_spec(&cfg.fso, n)).collect::<Result<_>>()?;
    match af_termwise_sum(cfg, gamma_th, |n, y| meijer_g(&specs[n as usize - 1], y))? {
        None => Ok(1.0),
        Some(s) => probability(1.0 - s, "AF outage (termwise)"),
    }
}

/// High-SNR AF outage: each Meijer-G term replaced by its head-residue
/// expansion. Not clamped (an asymptote, not a probability).
pub fn outage_af_asymptotic(cfg: &LinkConfig, gamma_th: f64) -> Result<f64> {
    cfg.require(Protocol::Af, "outage_af_asymptotic")?;
    if gamma_th <= 0.0 {
        return Ok(0.0);
    }
    let exps: Vec<Vec<ExpansionTerm>> = (1..=cfg.fso.malaga.params.beta)
        .map(|n| meijer_g_head_expansion(&outage_term_spec(&cfg.fso, n)?))
        .collect::<Result<_>>()?;
    let s = af_termwise_sum(cfg, gamma_th, |n, y| Ok(exps[n as usize - 1].iter().map(|t| t.eval(y)).sum()))?;
    Ok(s.map_or(1.0, |s| 1.0 - s))
}

pub fn outage_df(cfg: &LinkConfig, gamma_th: f64) -> Result<f64> {
    cfg.require(Protocol::Df, "outage_df")?;
    if gamma_th.is_nan() {
        return Err(Error::Domain("threshold is NaN".into()));
    }
    if gamma_th <= 0.0 {
        return Ok(0.0);
    }
    let Some((t1, t2)) = df_thresholds(cfg, gamma_th) else { return Ok(1.0) };
    let f1 = cdf_gamma1(&cfg.rf, t1);
    let f2 = cdf_gamma2(&cfg.fso, t2).map_err(|e| e.context("DF outage"))?;
    // 1 − (1−F₁)(1−F₂) without cancellation
    probability(f1 + (1.0 - f1) * f2, "DF outage")
}

/// Head-residue expansion of F_{γ₂}(γ): D·Σₙ cₙ·Σ_v R_v·(Eγ/μ_r)^{τ₄,v}.
pub fn cdf_gamma2_asymptotic(fso: &FsoHop, gamma: f64) -> Result<f64> {
    if gamma <= 0.0 {
        return Ok(0.0);
    }
    let (xi, r) = (fso.pp.xi, fso.r());
    let m = &fso.malaga;
    let z = m.big_e(xi, r) * gamma / fso.mu_eff();
    let mut acc = 0.0;
    for (i, c) in m.c_n(r).iter().enumerate() {
        let e = meijer_g_head_expansion(&fso.cdf_term_spec(i as u32 + 1)?)?;
        acc += c * e.iter().map(|t| t.eval(z)).sum::<f64>();
    }
    Ok(m.big_d(xi, r) * acc)
}

/// DF outage with F_{γ₂} replaced by its high-SNR expansion (F_{γ₁} exact).
pub fn outage_df_asymptotic(cfg: &LinkConfig, gamma_th: f64) -> Result<f64> {
    cfg.require(Protocol::Df, "outage_df_asymptotic")?;
    if gamma_th <= 0.0 {
        return Ok(0.0);
    }
    let Some((t1, t2)) = df_thresholds(cfg, gamma_th) else { return Ok(1.0) };
    let f1 = cdf_gamma1(&cfg.rf, t1);
    Ok(f1 + (1.0 - f1) * cdf_gamma2_asymptotic(&cfg.fso, t2)?)
}

// ---------------------------------------------------------------- SEP

fn check_c(c: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!("modulation constant c must be > 0, got {c}")));
    }
    Ok(())
}

/// E[Q(√(cγ))] = √(c/8π)∫₀^∞ e^{−cγ/2}γ^{−1/2}F_γ(γ)dγ, with γ = u² and the
/// part beyond the SNDR ceiling (F ≡ 1) added as Q(√(cU)).
pub fn sep_numeric(cfg: &LinkConfig, c: f64) -> Result<f64> {
    sep_from_cdf(c, |g| sndr_cdf(cfg, g), cfg.sndr_ceiling())
}

/// The SEP integral for an arbitrary SNDR CDF that equals 1 from `ceiling` on.
pub fn sep_from_cdf<F>(c: f64, cdf: F, ceiling: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    check_c(c)?;
    // e^{−cu²/2} underflows past this
    let u_cut = (1490.0 / c).sqrt();
    let u_max = ceiling.sqrt().min(u_cut);
    let mut breaks = vec![0.0];
    for b in [1e-6, 1e-4, 1e-2, 0.1, 0.3, 0.6, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 9.0, 14.0, 20.0] {
        let b = b / c.sqrt();
        if b < u_max {
            breaks.push(b);
        }
    }
    breaks.push(u_max);
    let failure = std::cell::Cell::new(None);
    let q = Quad { abs_tol: 1e-15, rel_tol: 1e-9, max_intervals: 2000 };
    let r = integrate_breaks(
        |u| {
            let g = u * u;
            match cdf(g) {
                Ok(f) => (-0.5 * c * g).exp() * f,
                Err(e) => {
                    failure.set(Some(e));
                    0.0
                }
            }
        },
        &breaks,
        &q,
    );
    if let Some(e) = failure.take() {
        return Err(e.context("SEP integrand"));
    }
    let body = 2.0 * (c / (8.0 * PI)).sqrt() * r.require("SEP quadrature")?;
    let tail = if ceiling.is_finite() { gaussian_q((c * ceiling).sqrt()) } else { 0.0 };
    probability(body + tail, "SEP")
}

fn require_ideal_af(cfg: &LinkConfig, what: &str) -> Result<()> {
    cfg.require(Protocol::Af, what)?;
    if !cfg.hw.is_ideal() {
        return Err(Error::InvalidParameter(format!("{what} is defined for ideal hardware only")));
    }
    Ok(())
}

/// (prefactor_k, w_k) of the ideal-AF SEP terms: √(c/8π)·A_k·√(2μ₁/(cμ₁+2λ_k)) and
/// 2λ_kCE/((cμ₁+2λ_k)μ_r).
fn sep_af_terms(cfg: &LinkConfig, c: f64) -> Vec<(f64, f64)> {
    let form = AfForm::new(cfg);
    let mu1 = cfg.rf.mu1;
    form.terms
        .iter()
        .map(|t| {
            let den = c * mu1 + 2.0 * t.rate;
            let pre = (c / (8.0 * PI)).sqrt() * t.weight * (2.0 * mu1 / den).sqrt();
            (pre, 2.0 * t.rate * form.lc.c * form.kernel.big_e / (den * form.kernel.mu))
        })
        .collect()
}

/// Ideal-hardware AF SEP in closed form (one fused contour per RF term).
pub fn sep_af_ideal_closed(cfg: &LinkConfig, c: f64) -> Result<f64> {
    require_ideal_af(cfg, "sep_af_ideal_closed")?;
    check_c(c)?;
    let k = cfg.fso.kernel();
    let mut acc = 0.0;
    for (pre, w) in sep_af_terms(cfg, c) {
        let g = k.line(|s| ln_gamma_c(-s) + ln_gamma_c(s + 0.5), 1.0, w.ln(), -0.5, 0.0)?;
        acc += pre * g;
    }
    probability(0.5 - acc, "ideal AF SEP")
}

/// The n-th term G^{3r+1,1}_{r+1,3r+1}(· | ½, τ₅; τ₄) of the ideal-AF SEP.
pub fn sep_term_spec(fso: &FsoHop, n: u32) -> Result<MeijerGSpec> {
    let (xi2, alpha, r) = (fso.pp.xi * fso.pp.xi, fso.malaga.params.alpha, fso.r() as usize);
    let mut a = vec![0.5];
    a.extend(delta_vec(r, xi2 + 1.0));
    MeijerGSpec::new(3 * r + 1, 1, a, tau4(xi2, alpha, r, n))
}

fn sep_af_sum<G>(cfg: &LinkConfig, c: f64, mut g: G) -> Result<f64>
where
    G: FnMut(u32, f64) -> Result<f64>,
{
    let (xi, r) = (cfg.fso.pp.xi, cfg.fso.r());
    let d = cfg.fso.malaga.big_d(xi, r);
    let c_n = cfg.fso.malaga.c_n(r);
    let mut acc = 0.0;
    for (pre, w) in sep_af_terms(cfg, c) {
        for (i, cn) in c_n.iter().enumerate() {
            acc += pre * d * cn * g(i as u32 + 1, w)?;
        }
    }
    Ok(0.5 - acc)
}

/// Ideal-AF SEP as the literal double sum of Meijer-G terms.
pub fn sep_af_ideal_termwise(cfg: &LinkConfig, c: f64) -> Result<f64> {
    require_ideal_af(cfg, "sep_af_ideal_termwise")?;
    check_c(c)?;
    let specs: Vec<MeijerGSpec> =
        (1..=cfg.fso.malaga.params.beta).map(|n| sep_term_spec(&cfg.fso, n)).collect::<Result<_>>()?;
    let v = sep_af_sum(cfg, c, |n, w| meijer_g(&specs[n as usize - 1], w))?;
    probability(v, "ideal AF SEP (termwise)")
}

/// High-SNR ideal-AF SEP from the head-residue expansion of each term.
pub fn sep_af_ideal_asymptotic(cfg: &LinkConfig, c: f64) -> Result<f64> {
    require_ideal_af(cfg, "sep_af_ideal_asymptotic")?;
    check_c(c)?;
    let exps: Vec<Vec<ExpansionTerm>> = (1..=cfg.fso.malaga.params.beta)
        .map(|n| meijer_g_head_expansion(&sep_term_spec(&cfg.fso, n)?))
        .collect::<Result<_>>()?;
    sep_af_sum(cfg, c, |n, w| Ok(exps[n as usize - 1].iter().map(|t| t.eval(w)).sum()))
}

/// Diversity/coding gains of the high-SNR SEP P̄e ≈ (G_c·γ̄)^{−G_d}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HighSnrSep {
    pub diversity_gain: f64,
    /// None when impairments floor the SEP (G_d = 0).
    pub coding_gain: Option<f64>,
    /// True when the SEP saturates at an irreducible floor.
    pub floor: bool,
}

impl HighSnrSep {
    /// (G_c·γ̄)^{−G_d}; NaN on a floored profile.
    pub fn sep(&self, mean_snr: f64) -> f64 {
        match self.coding_gain {
            Some(gc) => (gc * mean_snr).powf(-self.diversity_gain),
            None => f64::NAN,
        }
    }
}

/// Leading exponent of F_γ at the origin for DF with μ₁ = μ_r:
/// min(1, min(ξ², α, 1)/r) — the RF hop contributes γ¹, the optical hop
/// γ^{min(ξ², α, 1)/r}.
pub fn diversity_gain(fso: &FsoHop) -> f64 {
    fso.kernel().min_head().min(1.0)
}

/// G_d and G_c of ideal DF relaying, from F_γ ≈ F_{γ₁} + F_{γ₂} ≈ 𝒜·(γ/γ̄)^{G_d}:
/// P̄e ≈ 𝒜·2^{G_d−1}Γ(G_d+½)/√π·(cγ̄)^{−G_d}, so G_c = c·(𝒜·2^{G_d−1}Γ(G_d+½)/√π)^{−1/G_d}.
pub fn sep_df_high_snr(cfg: &LinkConfig, c: f64) -> Result<HighSnrSep> {
    check_c(c)?;
    if !cfg.hw.is_ideal() {
        return Ok(HighSnrSep { diversity_gain: 0.0, coding_gain: None, floor: true });
    }
    let gd = diversity_gain(&cfg.fso);
    let k = cfg.fso.kernel();
    let mut coeff = 0.0;
    if (gd - 1.0).abs() < 1e-12 {
        // F_{γ₁}(γ) ≈ f₁(0)·γ, with f₁(0)·μ₁ = Σ A_k λ_k
        coeff += cfg.rf.terms().iter().map(|t| t.weight * t.rate).sum::<f64>();
    }
    let h = k.min_head();
    if (h - gd).abs() < 1e-12 {
        // F_{γ₂}(γ) ≈ −Res_{s=h}[Ψ(s)/s]·(Eγ/μ_r)^h (the pole lies right of the line)
        let gap = k.heads(1).iter().map(|v| (v - h).abs()).filter(|d| *d > 1e-9).fold(h, f64::min);
        let radius = 0.4 * gap.min(0.5);
        let res = numeric_residue(|s| (k.ln_psi(s)).exp() / s, h, radius, 128).re;
        coeff -= res * k.big_e.powf(h);
    }
    let lead = coeff * 2f64.powf(gd - 1.0) * ln_gamma(gd + 0.5).exp() / PI.sqrt();
    Ok(HighSnrSep { diversity_gain: gd, coding_gain: Some(c * lead.powf(-1.0 / gd)), floor: false })
}

// ---------------------------------------------------------------- capacity

fn check_varpi(cfg: &LinkConfig) -> Result<()> {
    if !(cfg.varpi > 0.0) || !cfg.varpi.is_finite() {
        return Err(Error::InvalidParameter(format!("varpi must be > 0, got {}", cfg.varpi)));
    }
    Ok(())
}

/// ∫₀^U w(γ)·F̄(γ) dγ on a logarithmic grid: the part below γ_lo is taken as
/// ∫w (F̄ ≈ 1 there), the upper end is U or where the integrand dies out.
fn log_grid_integral<W, S>(w: W, w_prim: impl Fn(f64) -> f64, sf: S, upper: f64, scale: f64) -> Result<f64>
where
    W: Fn(f64) -> f64,
    S: Fn(f64) -> Result<f64>,
{
    let lo = 1e-10 * scale;
    let mut hi = upper;
    if !hi.is_finite() {
        hi = scale;
        loop {
            let v = sf(hi)? * w(hi) * hi;
            if v < 1e-16 || hi > 1e30 {
                break;
            }
            hi *= 4.0;
        }
    }
    if hi <= lo {
        return Ok(w_prim(hi));
    }
    let (u0, u1) = (lo.ln(), hi.ln());
    let n = ((u1 - u0) / 1.5).ceil().max(2.0) as usize;
    let breaks: Vec<f64> = (0..=n).map(|i| u0 + (u1 - u0) * i as f64 / n as f64).collect();
    let failure = std::cell::Cell::new(None);
    let q = Quad { abs_tol: 1e-13, rel_tol: 1e-9, max_intervals: 1500 };
    let r = integrate_breaks(
        |u| {
            let g = u.exp();
            match sf(g) {
                Ok(f) => f * w(g) * g,
                Err(e) => {
                    failure.set(Some(e));
                    0.0
                }
            }
        },
        &breaks,
        &q,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok(w_prim(lo) + r.require("capacity quadrature")?)
}

/// C̄ = (ϖ/ln 2)∫₀^U F̄_γ(γ)/(1+ϖγ) dγ, U the SNDR ceiling.
pub fn ec_numeric(cfg: &LinkConfig) -> Result<f64> {
    check_varpi(cfg)?;
    let scale = cfg.rf.mu1.min(cfg.fso.mu_eff()).max(1.0);
    ec_from_ccdf(cfg.varpi, |g| sndr_ccdf(cfg, g), cfg.sndr_ceiling(), scale)
        .map_err(|e| e.context("ergodic capacity"))
}

/// E[log₂(1+ϖγ)] from the CCDF of γ (zero from `ceiling` on); `scale` is a
/// typical SNDR magnitude that anchors the integration grid.
pub fn ec_from_ccdf<S>(varpi: f64, ccdf: S, ceiling: f64, scale: f64) -> Result<f64>
where
    S: Fn(f64) -> Result<f64>,
{
    log_grid_integral(
        |g| varpi / ((1.0 + varpi * g) * LN_2),
        |g| (varpi * g).ln_1p() / LN_2,
        ccdf,
        ceiling,
        scale,
    )
}

fn aggregate_af(cfg: &LinkConfig, what: &str) -> Result<(f64, f64)> {
    cfg.require(Protocol::Af, what)?;
    match cfg.hw {
        HardwareProfile::Ideal => Ok((0.0, 0.0)),
        HardwareProfile::Aggregate { kappa1, kappa2 } => Ok((aggregate_delta(kappa1, kappa2), kappa2)),
        HardwareProfile::Hpa(_) => {
            Err(Error::InvalidParameter(format!("{what} is defined for the aggregate impairment model")))
        }
    }
}

/// 𝒥 = E[γ₁γ₂/((1+κ₂²)γ₂ + C)] = E[γ₁]/(1+κ₂²)·E[1/(1 + C′E/(μ_r X))].
pub fn j_factor(cfg: &LinkConfig) -> Result<f64> {
    let (_, kappa2) = aggregate_af(cfg, "j_factor")?;
    let lc = cfg.constants();
    let k = cfg.fso.kernel();
    let q = 1.0 + kappa2 * kappa2;
    let w = lc.c * k.big_e / (q * k.mu);
    let g = k.line(|s| ln_gamma_c(-s) + ln_gamma_c(s + 1.0), 1.0, w.ln(), -1.0, 0.0)?;
    Ok(lc.egamma1 / q * g)
}

/// 𝒥 as the literal Meijer-G sum over n.
pub fn j_factor_termwise(cfg: &LinkConfig) -> Result<f64> {
    let (_, kappa2) = aggregate_af(cfg, "j_factor_termwise")?;
    let lc = cfg.constants();
    let fso = &cfg.fso;
    let (xi, r) = (fso.pp.xi, fso.r());
    let (xi2, alpha, ru) = (xi * xi, fso.malaga.params.alpha, r as usize);
    let q = 1.0 + kappa2 * kappa2;
    let z = fso.malaga.big_e(xi, r) * lc.c / (q * fso.mu_eff());
    let mut acc = 0.0;
    for (i, c) in fso.malaga.c_n(r).iter().enumerate() {
        let mut a = vec![0.0];
        a.extend(delta_vec(ru, xi2 + 1.0));
        let spec = MeijerGSpec::new(3 * ru + 1, 1, a, tau4(xi2, alpha, ru, i as u32 + 1))?;
        acc += c * meijer_g(&spec, z)?;
    }
    Ok(lc.egamma1 / q * fso.malaga.big_d(xi, r) * acc)
}

/// Jensen bound C̄ ≤ log₂(1 + ϖ𝒥/(δ𝒥 + 1)).
pub fn ec_upper_bound_af(cfg: &LinkConfig) -> Result<f64> {
    check_varpi(cfg)?;
    let (delta, _) = aggregate_af(cfg, "ec_upper_bound_af")?;
    let j = j_factor(cfg)?;
    Ok((cfg.varpi * j / (delta * j + 1.0)).ln_1p() / LN_2)
}

/// log₂(1 + ϖE[γ₁γ₂]/E[denominator]) for the AF SNDR.
pub fn ec_approx(cfg: &LinkConfig) -> Result<f64> {
    cfg.require(Protocol::Af, "ec_approx")?;
    check_varpi(cfg)?;
    let lc = cfg.constants();
    let e1 = mean_gamma1(&cfg.rf);
    let e2 = moment_gamma2(&cfg.fso, 1.0)?;
    let den = match cfg.hw {
        HardwareProfile::Ideal => e2 + lc.c,
        HardwareProfile::Aggregate { kappa1, kappa2 } => {
            aggregate_delta(kappa1, kappa2) * e1 * e2 + (1.0 + kappa2 * kappa2) * e2 + lc.c
        }
        HardwareProfile::Hpa(_) => lc.kappa * e2 + lc.c,
    };
    Ok((cfg.varpi * e1 * e2 / den).ln_1p() / LN_2)
}

fn require_hpa(cfg: &LinkConfig, what: &str) -> Result<()> {
    cfg.require(Protocol::Af, what)?;
    if !matches!(cfg.hw, HardwareProfile::Hpa(_)) {
        return Err(Error::InvalidParameter(format!("{what} needs the HPA hardware profile")));
    }
    Ok(())
}

/// A capacity value and whether it came from the quadrature fallback.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityValue {
    pub value: f64,
    pub fallback: bool,
}

/// Per-RF-term data of the HPA capacity: (A_k, a_k = λ_kκ/μ₁) and the common
/// y = CE/(κμ_r).
fn hpa_terms(cfg: &LinkConfig) -> (Vec<(f64, f64)>, f64) {
    let lc = cfg.constants();
    let k = cfg.fso.kernel();
    let mu1 = cfg.rf.mu1;
    let terms = cfg.rf.terms().iter().map(|t| (t.weight, t.rate * lc.kappa / mu1)).collect();
    (terms, lc.c * k.big_e / (lc.kappa * k.mu))
}

/// Abscissae for Γ(−s)Γ(1+s)Γ(1+s+t)x^s·Ψ(t)Γ(−t)y^t: −1 < cs < 0, ct < 0,
/// cs + ct > −1, placed at the joint real-axis minimum.
fn hpa_contour(k: &SnrKernel, ln_x: f64, ln_y: f64) -> (f64, f64) {
    let phi = |cs: f64, ct: f64| {
        let s = Complex64::new(cs, 0.0);
        let t = Complex64::new(ct, 0.0);
        (ln_gamma_c(-s) + ln_gamma_c(s + 1.0) + ln_gamma_c(s + t + 1.0) + k.ln_psi(t) + ln_gamma_c(-t)).re
            + cs * ln_x
            + ct * ln_y
    };
    let margin = 0.03;
    let n = 48;
    let mut best = (-0.5, -0.25);
    let mut best_v = f64::INFINITY;
    for i in 0..=n {
        let cs = -1.0 + margin + (1.0 - 2.0 * margin) * i as f64 / n as f64;
        for j in 0..=n {
            let ct = -(margin + (1.0 - 2.0 * margin) * j as f64 / n as f64);
            if 1.0 + cs + ct < margin {
                continue;
            }
            let v = phi(cs, ct);
            if v < best_v {
                best_v = v;
                best = (cs, ct);
            }
        }
    }
    best
}

/// HPA capacity in closed form: per RF term, a bivariate Mellin–Barnes
/// integral (the Fox-H of the capacity kernel with the n-sum fused into Ψ).
/// Falls back to [`ec_numeric`] if the contour quadrature fails.
pub fn ec_hpa_closed(cfg: &LinkConfig) -> Result<CapacityValue> {
    require_hpa(cfg, "ec_hpa_closed")?;
    check_varpi(cfg)?;
    match ec_hpa_contour(cfg) {
        Ok(value) => Ok(CapacityValue { value, fallback: false }),
        Err(Error::AccuracyFailure { .. }) | Err(Error::Range(_)) => {
            Ok(CapacityValue { value: ec_numeric(cfg)?, fallback: true })
        }
        Err(e) => Err(e),
    }
}

fn ec_hpa_contour(cfg: &LinkConfig) -> Result<f64> {
    let k = cfg.fso.kernel();
    let (terms, y) = hpa_terms(cfg);
    let ln_y = y.ln();
    let vp = cfg.varpi;
    let mut acc = 0.0;
    for (weight, a) in terms {
        let x = vp / a;
        let (cs, ct) = hpa_contour(&k, x.ln(), ln_y);
        let h = iterated_contour(
            |s, t| ln_gamma_c(-s) + ln_gamma_c(s + 1.0) + ln_gamma_c(s + t + 1.0),
            |t| (k.ln_psi(t) + ln_gamma_c(-t) + t * ln_y).exp(),
            x,
            cs,
            ct,
            1e-8,
        )?;
        acc += weight * h / a;
    }
    Ok(vp / LN_2 * acc)
}

/// HPA capacity as the literal sum of bivariate Fox-H terms over (k, n).
pub fn ec_hpa_termwise(cfg: &LinkConfig) -> Result<f64> {
    require_hpa(cfg, "ec_hpa_termwise")?;
    let fso = &cfg.fso;
    let (xi, r) = (fso.pp.xi, fso.r());
    let (xi2, alpha, ru) = (xi * xi, fso.malaga.params.alpha, r as usize);
    let d = fso.malaga.big_d(xi, r);
    let c_n = fso.malaga.c_n(r);
    let specs: Vec<FoxH2Spec> = (1..=c_n.len() as u32)
        .map(|n| FoxH2Spec::capacity_kernel(&delta_vec(ru, xi2 + 1.0), &tau4(xi2, alpha, ru, n)))
        .collect::<Result<_>>()?;
    let (terms, y) = hpa_terms(cfg);
    let vp = cfg.varpi;
    let mut acc = 0.0;
    for (weight, a) in terms {
        for (spec, c) in specs.iter().zip(&c_n) {
            acc += weight / a * d * c * fox_h_bivariate(spec, vp / a, y)?;
        }
    }
    Ok(vp / LN_2 * acc)
}

/// ∫₀^∞ e^{−u}u^p(L + ln u)^j/(1 + k·u) du, on u = e^v.
fn log_moment(p: f64, l: f64, j: usize, k: f64) -> Result<f64> {
    let lo = -40.0 / (p + 1.0);
    let n = ((4.0 - lo) / 2.0).ceil() as usize;
    let breaks: Vec<f64> = (0..=n).map(|i| lo + (4.0 - lo) * i as f64 / n as f64).collect();
    let q = Quad { abs_tol: 1e-15, rel_tol: 1e-11, max_intervals: 1000 };
    integrate_breaks(
        |v| {
            let u = v.exp();
            (-u + v * (p + 1.0)).exp() * (l + v).powi(j as i32) / (1.0 + k * u)
        },
        &breaks,
        &q,
    )
    .require("capacity log-moment")
}

/// High-SNR HPA capacity: the optical CCDF term replaced by its head-residue
/// expansion Σ_v R_v·y^{τ₄,v}, leaving per term
///   (ϖ/ln 2)·A_k·D·cₙ·R_v·(μ₁/ζ₃)^{τ+1}(ζ₄/(μ₁μ_r))^τ·∫e^{−u}u^τ/(1+ϖμ₁u/ζ₃)du.
/// The (1+ϖγ)^{−1} weight is kept inside the u-integral.
pub fn ec_hpa_asymptotic(cfg: &LinkConfig) -> Result<f64> {
    require_hpa(cfg, "ec_hpa_asymptotic")?;
    check_varpi(cfg)?;
    let fso = &cfg.fso;
    let (xi, r) = (fso.pp.xi, fso.r());
    let d = fso.malaga.big_d(xi, r);
    let c_n = fso.malaga.c_n(r);
    let exps: Vec<Vec<ExpansionTerm>> = (1..=c_n.len() as u32)
        .map(|n| meijer_g_head_expansion(&outage_term_spec(fso, n)?))
        .collect::<Result<_>>()?;
    let (terms, y) = hpa_terms(cfg);
    let ln_y = y.ln();
    let vp = cfg.varpi;
    let mut acc = 0.0;
    for (weight, a) in terms {
        for (e, c) in exps.iter().zip(&c_n) {
            for t in e {
                // ∫e^{−aγ}(bγ)^p ln^j(bγ)/(1+ϖγ)dγ = a^{−1}(b/a)^p ∫e^{−u}u^p(ln(b/a)+ln u)^j/(1+(ϖ/a)u)du
                let mut v = 0.0;
                for (j, lc) in t.log_coeffs.iter().enumerate() {
                    if *lc != 0.0 {
                        v += lc * log_moment(t.exponent, ln_y, j, vp / a)?;
                    }
                }
                acc += weight * d * c * v * (t.exponent * ln_y).exp() / a;
            }
        }
    }
    Ok(vp / LN_2 * acc)
}

/// min over hops of E[log₂(1 + ϖγᵢ/(κᵢ²γᵢ + 1))].
pub fn ec_df_bound(cfg: &LinkConfig) -> Result<f64> {
    cfg.require(Protocol::Df, "ec_df_bound")?;
    check_varpi(cfg)?;
    let (k1, k2) = cfg.hw.kappas();
    let vp = cfg.varpi;
    let hop = |k2i: f64, mean: f64, sf: &dyn Fn(f64) -> Result<f64>| {
        log_grid_integral(
            // d/dγ log₂(1 + ϖγ/(κ²γ+1))
            |g| vp / ((k2i * g + 1.0) * (k2i * g + 1.0 + vp * g) * LN_2),
            |g| (vp * g / (k2i * g + 1.0)).ln_1p() / LN_2,
            sf,
            f64::INFINITY,
            mean.max(1.0),
        )
    };
    let c1 = hop(k1 * k1, cfg.rf.mu1, &|g| Ok(ccdf_gamma1(&cfg.rf, g)))?;
    let c2 = hop(k2 * k2, cfg.fso.mu_eff(), &|g| ccdf_gamma2(&cfg.fso, g))?;
    Ok(c1.min(c2))
}

/// Everything that stays finite as μ₁, μ_r → ∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoteReport {
    pub diversity_gain: f64,
    pub coding_gain: Option<f64>,
    pub ceiling_sndr: f64,
    pub ceiling_capacity: f64,
}

/// SNDR and capacity ceilings plus the diversity/coding gains (the latter at
/// CBPSK, c = 2).
pub fn ceilings(cfg: &LinkConfig) -> AsymptoteReport {
    let ceiling_sndr = cfg.sndr_ceiling();
    let ceiling_capacity = match cfg.hw {
        HardwareProfile::Hpa(h) => h.capacity_ceiling(cfg.varpi),
        _ => (cfg.varpi * ceiling_sndr).ln_1p() / LN_2,
    };
    let (diversity_gain, coding_gain) = if cfg.hw.is_ideal() {
        let gc = if cfg.protocol == Protocol::Df {
            sep_df_high_snr(cfg, 2.0).ok().and_then(|s| s.coding_gain)
        } else {
            None
        };
        (diversity_gain(&cfg.fso), gc)
    } else {
        (0.0, None)
    };
    AsymptoteReport { diversity_gain, coding_gain, ceiling_sndr, ceiling_capacity }
}

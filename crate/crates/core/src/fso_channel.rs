//! Second hop: Málaga (𝓜) turbulence × Rayleigh-jitter pointing error ×
//! Beers–Lambert path loss, seen through the detection map γ₂ = μ_r·Î^r
//! (r = 1 heterodyne, r = 2 IM/DD) with Î = I/E[I].
//!
//! Everything downstream (OP, SEP, EC) only needs the Mellin transform of
//! X = E·γ₂/μ_r, E = B^r/r^{2r}. It is
//!
//!   Ψ(s) = E[X^{−s}] = D·Σₙ cₙ·∏Γ(Δ(r:ξ²)−s)∏Γ(Δ(r:α)−s)∏Γ(Δ(r:n)−s)/∏Γ(Δ(r:ξ²+1)−s),
//!
//! which collapses to a single Gamma product times a polynomial:
//!   ∏Γ(Δ(r:ξ²)−s)/∏Γ(Δ(r:ξ²+1)−s) = 1/(ξ²/r − s),
//!   ∏Γ(Δ(r:n)−s) = ∏Γ(Δ(r:1)−s)·∏_{j=1}^{n−1}(j/r − s).
//! [`SnrKernel`] evaluates that fused form; the per-term Meijer-G sums are kept
//! as an independent route.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::specfun::gamma::{ln_binomial, ln_gamma, ln_gamma_c};
use crate::specfun::mellin::{minimise_left_open, minimise_on, vertical_line_integral};
use crate::specfun::{bessel_k, delta_vec, meijer_g, MeijerGSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MalagaParams {
    pub alpha: f64,
    /// Natural number.
    pub beta: u32,
    pub rho: f64,
    /// Half the average power of the scatter components.
    pub b0: f64,
    /// LOS power.
    pub omega: f64,
    /// φ_A − φ_B (radians).
    pub dphi: f64,
}

impl MalagaParams {
    /// Reference turbulence with the neutral phase choice Δφ = π/2.
    pub fn reference() -> Self {
        MalagaParams { alpha: 4.2, beta: 5, rho: 0.6, b0: 0.596, omega: 1.32, dphi: PI / 2.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return bad(format!("alpha must be > 0, got {}", self.alpha));
        }
        if self.beta < 1 || self.beta > 60 {
            return bad(format!("beta must be a natural number ≤ 60, got {}", self.beta));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return bad(format!("rho must be in [0,1], got {}", self.rho));
        }
        if !(self.b0 > 0.0) || !self.b0.is_finite() {
            return bad(format!("b0 must be > 0, got {}", self.b0));
        }
        if !(self.omega >= 0.0) || !self.omega.is_finite() {
            return bad(format!("Omega must be ≥ 0, got {}", self.omega));
        }
        if !self.dphi.is_finite() {
            return bad("dphi must be finite".into());
        }
        Ok(())
    }
}

/// Constants of the Málaga density that do not depend on pointing or detection.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MalagaDerived {
    pub params: MalagaParams,
    pub g: f64,
    pub omega_p: f64,
    pub a_const: f64,
    /// a₁…a_β
    pub a_n: Vec<f64>,
    /// b₁…b_β
    pub b_n: Vec<f64>,
}

pub fn derive_malaga(p: &MalagaParams) -> Result<MalagaDerived> {
    p.validate()?;
    let (alpha, beta) = (p.alpha, p.beta as f64);
    let g = 2.0 * p.b0 * (1.0 - p.rho);
    if !(g > 0.0) {
        return Err(Error::DegenerateParameters(
            "g = 2b0(1−ρ) vanishes (ρ = 1): the Málaga constant A is undefined".into(),
        ));
    }
    let omega_p = p.omega
        + 2.0 * p.rho * p.b0
        + 2.0 * (2.0 * p.rho * p.b0 * p.omega).sqrt() * p.dphi.cos();
    if !(omega_p >= 0.0) {
        return Err(Error::InvalidParameter(format!("Ω′ = {omega_p} is negative")));
    }
    let gb = g * beta + omega_p;
    let ln_a = 2f64.ln() + 0.5 * alpha * alpha.ln() - (1.0 + 0.5 * alpha) * g.ln() - ln_gamma(alpha)
        + (beta + 0.5 * alpha) * (g * beta / gb).ln();
    let mut a_n = Vec::with_capacity(p.beta as usize);
    let mut b_n = Vec::with_capacity(p.beta as usize);
    for n in 1..=p.beta {
        let nf = n as f64;
        // (Ω′/g)^{n−1} with 0⁰ = 1
        let ratio = if n == 1 { 0.0 } else { (nf - 1.0) * (omega_p / g).ln() };
        // exponents n/2 (not α/2): only this form integrates to one
        let ln_an = ln_binomial(p.beta - 1, n - 1) + (1.0 - 0.5 * nf) * gb.ln() - ln_gamma(nf)
            + ratio
            + 0.5 * nf * (alpha / beta).ln();
        let ln_bn = ln_an + 0.5 * (alpha + nf) * (gb / (alpha * beta)).ln();
        a_n.push(ln_an.exp());
        b_n.push(ln_bn.exp());
    }
    Ok(MalagaDerived { params: *p, g, omega_p, a_const: ln_a.exp(), a_n, b_n })
}

impl MalagaDerived {
    /// E[I_a] = g + Ω′.
    pub fn mean_ia(&self) -> f64 {
        self.g + self.omega_p
    }

    /// B = αβh(g+Ω′)/(gβ+Ω′), h = ξ²/(ξ²+1).
    pub fn big_b(&self, xi: f64) -> f64 {
        let (alpha, beta) = (self.params.alpha, self.params.beta as f64);
        let xi2 = xi * xi;
        let h = xi2 / (xi2 + 1.0);
        alpha * beta * h * (self.g + self.omega_p) / (self.g * beta + self.omega_p)
    }

    /// cₙ = bₙ·r^{α+n−1}.
    pub fn c_n(&self, r: u32) -> Vec<f64> {
        let rf = r as f64;
        self.b_n
            .iter()
            .enumerate()
            .map(|(i, b)| b * rf.powf(self.params.alpha + i as f64))
            .collect()
    }

    /// D = ξ²A/[2^r(2π)^{r−1}].
    pub fn big_d(&self, xi: f64, r: u32) -> f64 {
        xi * xi * self.a_const / (2f64.powi(r as i32) * (2.0 * PI).powi(r as i32 - 1))
    }

    /// E = B^r/r^{2r}.
    pub fn big_e(&self, xi: f64, r: u32) -> f64 {
        let rf = r as f64;
        self.big_b(xi).powi(r as i32) / rf.powi(2 * r as i32)
    }
}

/// Turbulence density f_{I_a}(I).
pub fn pdf_ia(d: &MalagaDerived, i: f64) -> Result<f64> {
    if !(i > 0.0) {
        return Err(Error::Domain(format!("pdf_Ia needs I > 0, got {i}")));
    }
    let (alpha, beta) = (d.params.alpha, d.params.beta as f64);
    let arg = 2.0 * (alpha * beta * i / (d.g * beta + d.omega_p)).sqrt();
    let mut acc = 0.0;
    for (k, a) in d.a_n.iter().enumerate() {
        let n = (k + 1) as f64;
        acc += a * i.powf(0.5 * (alpha + n) - 1.0) * bessel_k(alpha - n, arg)?;
    }
    Ok(d.a_const * acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointingPathParams {
    /// ξ = w_Leq/(2σ_s).
    pub xi: f64,
    /// Collected fraction at zero offset.
    pub a0: f64,
    /// Attenuation coefficient (1/km).
    pub sigma_atten: f64,
    pub l_km: f64,
}

impl PointingPathParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.xi > 0.0) || !self.xi.is_finite() {
            return Err(Error::InvalidParameter(format!("xi must be > 0, got {}", self.xi)));
        }
        if !(self.a0 > 0.0 && self.a0 <= 1.0) {
            return Err(Error::InvalidParameter(format!("A0 must be in (0,1], got {}", self.a0)));
        }
        if !(self.sigma_atten >= 0.0) || !self.sigma_atten.is_finite() {
            return Err(Error::InvalidParameter(format!("sigma_atten must be ≥ 0, got {}", self.sigma_atten)));
        }
        if !(self.l_km > 0.0) || !self.l_km.is_finite() {
            return Err(Error::InvalidParameter(format!("L must be > 0, got {}", self.l_km)));
        }
        Ok(())
    }
}

/// I_l = e^{−σL}.
pub fn path_loss(pp: &PointingPathParams) -> f64 {
    (-pp.sigma_atten * pp.l_km).exp()
}

/// I_p = A₀·exp(−2R²/w_Leq²).
pub fn pointing_gain(pp: &PointingPathParams, w_leq: f64, radial: f64) -> f64 {
    pp.a0 * (-2.0 * radial * radial / (w_leq * w_leq)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionParams {
    /// 1 = heterodyne, 2 = IM/DD.
    pub r: u32,
    pub mu_r: f64,
}

impl DetectionParams {
    pub fn validate(&self) -> Result<()> {
        if self.r != 1 && self.r != 2 {
            return Err(Error::InvalidParameter(format!("r must be 1 or 2, got {}", self.r)));
        }
        if !(self.mu_r > 0.0) || !self.mu_r.is_finite() {
            return Err(Error::InvalidParameter(format!("mu_r must be > 0, got {}", self.mu_r)));
        }
        Ok(())
    }

    /// Capacity scaling ϖ: 1 for heterodyne, e/2π for IM/DD.
    pub fn default_varpi(&self) -> f64 {
        if self.r == 1 {
            1.0
        } else {
            std::f64::consts::E / (2.0 * PI)
        }
    }
}

/// Link geometry (SI units) used to derive the pointing constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    pub lambda: f64,
    pub w0: f64,
    pub f0: f64,
    pub cn2: f64,
    pub a_rx: f64,
    pub sigma_s: f64,
    pub l_m: f64,
}

impl GeometryParams {
    /// Reference geometry; σ_s is not tabulated and must be supplied.
    pub fn reference(sigma_s: f64) -> Self {
        GeometryParams { lambda: 1550e-9, w0: 5e-3, f0: -10.0, cn2: 2.8e-14, a_rx: 0.05, sigma_s, l_m: 1000.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometryDerived {
    pub w_l: f64,
    pub w_leq: f64,
    pub a0: f64,
    pub xi: f64,
    pub sigma_r2: f64,
}

/// Gaussian-beam propagation with long-term turbulence broadening, then the
/// Farid–Hranilovic aperture-averaged pointing model.
pub fn derive_geometry(gp: &GeometryParams) -> Result<GeometryDerived> {
    for (name, v) in [
        ("lambda", gp.lambda),
        ("w0", gp.w0),
        ("Cn2", gp.cn2),
        ("a_rx", gp.a_rx),
        ("L", gp.l_m),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
        }
    }
    if !(gp.sigma_s > 0.0) || !gp.sigma_s.is_finite() {
        return Err(Error::DegenerateParameters(format!("jitter sigma_s must be > 0, got {}", gp.sigma_s)));
    }
    if gp.f0 == 0.0 || !gp.f0.is_finite() {
        return Err(Error::InvalidParameter("F0 must be finite and nonzero".into()));
    }
    let k = 2.0 * PI / gp.lambda;
    let l = gp.l_m;
    let sigma_r2 = 1.23 * gp.cn2 * k.powf(7.0 / 6.0) * l.powf(11.0 / 6.0);
    let theta0 = 1.0 - l / gp.f0;
    let lambda0 = 2.0 * l / (k * gp.w0 * gp.w0);
    let free = theta0 * theta0 + lambda0 * lambda0;
    let lambda_rx = lambda0 / free;
    let w_l = gp.w0 * free.sqrt() * (1.0 + 1.33 * sigma_r2 * lambda_rx.powf(5.0 / 6.0)).sqrt();
    let v = PI.sqrt() * gp.a_rx / (SQRT_2 * w_l);
    let erf_v = libm::erf(v);
    let a0 = erf_v * erf_v;
    let w_leq = (w_l * w_l * PI.sqrt() * erf_v / (2.0 * v * (-v * v).exp())).sqrt();
    Ok(GeometryDerived { w_l, w_leq, a0, xi: w_leq / (2.0 * gp.sigma_s), sigma_r2 })
}

/// Fully specified optical hop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FsoHop {
    pub malaga: MalagaDerived,
    pub pp: PointingPathParams,
    pub det: DetectionParams,
    /// Fold I_l^r into the SNR scale instead of treating μ_r as already
    /// including it.
    pub include_path_loss: bool,
}

impl FsoHop {
    pub fn new(m: &MalagaParams, pp: PointingPathParams, det: DetectionParams) -> Result<Self> {
        pp.validate()?;
        det.validate()?;
        Ok(FsoHop { malaga: derive_malaga(m)?, pp, det, include_path_loss: false })
    }

    pub fn with_mu_r(&self, mu_r: f64) -> Self {
        FsoHop { det: DetectionParams { mu_r, ..self.det }, ..self.clone() }
    }

    pub fn r(&self) -> u32 {
        self.det.r
    }

    /// The SNR scale actually seen by the receiver.
    pub fn mu_eff(&self) -> f64 {
        if self.include_path_loss {
            self.det.mu_r * path_loss(&self.pp).powi(self.det.r as i32)
        } else {
            self.det.mu_r
        }
    }

    pub fn kernel(&self) -> SnrKernel {
        SnrKernel::new(self)
    }

    /// The Meijer-G shape G^{3r,1}_{r+1,3r+1}(· | τ₃; τ₄) of the n-th CDF term.
    pub fn cdf_term_spec(&self, n: u32) -> Result<MeijerGSpec> {
        let r = self.det.r as usize;
        let (xi2, alpha) = (self.pp.xi * self.pp.xi, self.malaga.params.alpha);
        let mut a = vec![1.0];
        a.extend(delta_vec(r, xi2 + 1.0));
        let mut b = delta_vec(r, xi2);
        b.extend(delta_vec(r, alpha));
        b.extend(delta_vec(r, n as f64));
        b.push(0.0);
        MeijerGSpec::new(3 * r, 1, a, b)
    }

    /// The Meijer-G shape G^{3,0}_{1,3}(· | ξ²+1; ξ², α, n) of the n-th PDF term.
    pub fn pdf_term_spec(&self, n: u32) -> Result<MeijerGSpec> {
        let xi2 = self.pp.xi * self.pp.xi;
        MeijerGSpec::new(3, 0, vec![xi2 + 1.0], vec![xi2, self.malaga.params.alpha, n as f64])
    }
}

/// Fused Mellin kernel Ψ(s) = E[X^{−s}] of X = E·γ₂/μ_r (see module docs).
#[derive(Debug, Clone)]
pub struct SnrKernel {
    r: usize,
    xi2: f64,
    alpha: f64,
    ln_d: f64,
    c_n: Vec<f64>,
    /// E = B^r/r^{2r}
    pub big_e: f64,
    /// μ_r actually in force (path loss folded in when requested).
    pub mu: f64,
}

const LINE_TOL: f64 = 1e-10;
const NEGLIGIBLE_LN: f64 = -644.0;

impl SnrKernel {
    fn new(hop: &FsoHop) -> Self {
        let r = hop.det.r;
        let xi = hop.pp.xi;
        SnrKernel {
            r: r as usize,
            xi2: xi * xi,
            alpha: hop.malaga.params.alpha,
            ln_d: hop.malaga.big_d(xi, r).ln(),
            c_n: hop.malaga.c_n(r),
            big_e: hop.malaga.big_e(xi, r),
            mu: hop.mu_eff(),
        }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Smallest pole of Ψ: min(ξ², α, 1)/r.
    pub fn min_head(&self) -> f64 {
        self.xi2.min(self.alpha).min(1.0) / self.r as f64
    }

    /// Pole heads of every Gamma family in Ψ(s)·Γ(−s), i.e. the τ₄ entries.
    pub fn heads(&self, n: u32) -> Vec<f64> {
        let mut v = delta_vec(self.r, self.xi2);
        v.extend(delta_vec(self.r, self.alpha));
        v.extend(delta_vec(self.r, n as f64));
        v.push(0.0);
        v
    }

    /// ln Ψ(s).
    pub fn ln_psi(&self, s: Complex64) -> Complex64 {
        let rf = self.r as f64;
        let mut acc = Complex64::new(self.ln_d, 0.0);
        for i in 0..self.r {
            acc += ln_gamma_c(Complex64::new((self.alpha + i as f64) / rf, 0.0) - s);
            acc += ln_gamma_c(Complex64::new((1.0 + i as f64) / rf, 0.0) - s);
        }
        acc -= (Complex64::new(self.xi2 / rf, 0.0) - s).ln();
        // Σₙ cₙ ∏_{j<n}(j/r − s), built up incrementally
        let mut poly = Complex64::new(1.0, 0.0);
        let mut sum = Complex64::new(0.0, 0.0);
        for (k, c) in self.c_n.iter().enumerate() {
            if k > 0 {
                poly *= Complex64::new(k as f64 / rf, 0.0) - s;
            }
            sum += poly * *c;
        }
        acc + sum.ln()
    }

    /// (1/2πi)∫ sign·exp(ln Ψ(s) + extra(s) + s·ln y) ds on a vertical line in
    /// (lo, hi), placed at the saddle of the real-axis log-magnitude.
    pub fn line<F>(&self, extra: F, sign: f64, ln_y: f64, lo: f64, hi: f64) -> Result<f64>
    where
        F: Fn(Complex64) -> Complex64,
    {
        let f = |s: Complex64| (self.ln_psi(s) + extra(s) + s * ln_y).exp() * sign;
        let phi = |c: f64| {
            let v = self.ln_psi(Complex64::new(c, 0.0)) + extra(Complex64::new(c, 0.0));
            v.re + c * ln_y
        };
        let c = if lo.is_finite() {
            let m = (0.25 * (hi - lo)).min(0.1);
            minimise_on(phi, lo + m, hi - m)
        } else {
            minimise_left_open(phi, hi - (0.25 * hi.abs()).clamp(0.02, 0.1))
        };
        if phi(c) < NEGLIGIBLE_LN {
            // |integral| ≲ e^{φ(c)}: below anything a probability can resolve
            return Ok(0.0);
        }
        Ok(vertical_line_integral(f, c, ln_y, LINE_TOL)?.value)
    }

    /// P(X ≤ y).
    pub fn cdf(&self, y: f64) -> Result<f64> {
        if y <= 0.0 {
            return Ok(0.0);
        }
        let lower = self.line(|s| -s.ln(), 1.0, y.ln(), 0.0, self.min_head())?;
        if lower <= 0.5 {
            return Ok(lower.clamp(0.0, 1.0));
        }
        Ok((1.0 - self.ccdf_raw(y)?).clamp(0.0, 1.0))
    }

    fn ccdf_raw(&self, y: f64) -> Result<f64> {
        // the s = 0 pole is crossed: 1 − F = −(1/2πi)∫_{c<0} Ψ(s)/s y^s ds
        self.line(|s| -(-s).ln(), 1.0, y.ln(), f64::NEG_INFINITY, 0.0)
    }

    /// P(X > y).
    pub fn ccdf(&self, y: f64) -> Result<f64> {
        if y <= 0.0 {
            return Ok(1.0);
        }
        let upper = self.ccdf_raw(y)?;
        if upper <= 0.5 {
            return Ok(upper.clamp(0.0, 1.0));
        }
        Ok((1.0 - self.cdf(y)?).clamp(0.0, 1.0))
    }

    /// E[exp(−y/X)] = (1/2πi)∫Ψ(s)Γ(−s)y^s ds, c < 0.
    pub fn exp_inverse_mean(&self, y: f64) -> Result<f64> {
        if y <= 0.0 {
            return Ok(1.0);
        }
        let v = self.line(|s| ln_gamma_c(-s), 1.0, y.ln(), f64::NEG_INFINITY, 0.0)?;
        if v < 0.5 {
            return Ok(v.clamp(0.0, 1.0));
        }
        Ok((1.0 - self.one_minus_exp_inverse_mean(y)?).clamp(0.0, 1.0))
    }

    /// 1 − E[exp(−y/X)], computed directly (no cancellation for small y).
    pub fn one_minus_exp_inverse_mean(&self, y: f64) -> Result<f64> {
        if y <= 0.0 {
            return Ok(0.0);
        }
        // moving the line right over s = 0 picks up the residue 1;
        // Γ(−s) < 0 on (0,1), hence the sign flip
        self.line(|s| ln_gamma_c(-s), -1.0, y.ln(), 0.0, self.min_head().min(1.0))
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_nan() {
        return Err(Error::Domain("SNR argument is NaN".into()));
    }
    Ok(())
}

/// F_{γ₂}(γ) via the fused kernel.
pub fn cdf_gamma2(hop: &FsoHop, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let k = hop.kernel();
    k.cdf(k.big_e * gamma / k.mu)
}

/// 1 − F_{γ₂}(γ).
pub fn ccdf_gamma2(hop: &FsoHop, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    let k = hop.kernel();
    k.ccdf(k.big_e * gamma / k.mu)
}

/// F_{γ₂}(γ) as the literal sum D·Σₙ cₙ·G^{3r,1}_{r+1,3r+1}(Eγ/μ_r | τ₃; τ₄).
pub fn cdf_gamma2_termwise(hop: &FsoHop, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if gamma <= 0.0 {
        return Ok(0.0);
    }
    let (xi, r) = (hop.pp.xi, hop.det.r);
    let m = &hop.malaga;
    let z = m.big_e(xi, r) * gamma / hop.mu_eff();
    let mut acc = 0.0;
    for (k, c) in m.c_n(r).iter().enumerate() {
        acc += c * meijer_g(&hop.cdf_term_spec(k as u32 + 1)?, z)?;
    }
    Ok(m.big_d(xi, r) * acc)
}

/// f_{γ₂}(γ) = ξ²A/(2^r γ)·Σₙ bₙ·G^{3,0}_{1,3}(B(γ/μ_r)^{1/r} | ξ²+1; ξ², α, n),
/// with the n-sum fused under one contour integral.
pub fn pdf_gamma2(hop: &FsoHop, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if gamma <= 0.0 {
        return Ok(0.0);
    }
    let m = &hop.malaga;
    let (xi, r) = (hop.pp.xi, hop.det.r);
    let xi2 = xi * xi;
    let alpha = m.params.alpha;
    let w = m.big_b(xi) * (gamma / hop.mu_eff()).powf(1.0 / r as f64);
    let ln_w = w.ln();
    let one = Complex64::new(1.0, 0.0);
    let ln_k = |s: Complex64| {
        let mut poly = one;
        let mut sum = Complex64::new(0.0, 0.0);
        for (k, b) in m.b_n.iter().enumerate() {
            if k > 0 {
                poly *= Complex64::new(k as f64, 0.0) - s;
            }
            sum += poly * *b;
        }
        ln_gamma_c(Complex64::new(alpha, 0.0) - s) + ln_gamma_c(one - s)
            - (Complex64::new(xi2, 0.0) - s).ln()
            + sum.ln()
    };
    let hi = xi2.min(alpha).min(1.0);
    let phi = |c: f64| ln_k(Complex64::new(c, 0.0)).re + c * ln_w;
    let c = minimise_left_open(phi, hi - (0.25 * hi).min(0.1));
    if phi(c) < NEGLIGIBLE_LN {
        return Ok(0.0);
    }
    let g = vertical_line_integral(|s| (ln_k(s) + s * ln_w).exp(), c, ln_w, LINE_TOL)?.value;
    let scale = xi2 * m.a_const / (2f64.powi(r as i32) * gamma);
    Ok((scale * g).max(0.0))
}

/// The same density as the literal per-term Meijer-G sum.
pub fn pdf_gamma2_termwise(hop: &FsoHop, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if gamma <= 0.0 {
        return Ok(0.0);
    }
    let m = &hop.malaga;
    let (xi, r) = (hop.pp.xi, hop.det.r);
    let w = m.big_b(xi) * (gamma / hop.mu_eff()).powf(1.0 / r as f64);
    let mut acc = 0.0;
    for (k, b) in m.b_n.iter().enumerate() {
        acc += b * meijer_g(&hop.pdf_term_spec(k as u32 + 1)?, w)?;
    }
    Ok(xi * xi * m.a_const / (2f64.powi(r as i32) * gamma) * acc)
}

/// E[γ₂^k] = rξ²A·Γ(rk+α)/(2^r(kr+ξ²)B^{kr})·Σₙ bₙΓ(rk+n)·μ_r^k.
pub fn moment_gamma2(hop: &FsoHop, k: f64) -> Result<f64> {
    if !(k > -hop.kernel().min_head()) || !k.is_finite() {
        return Err(Error::Domain(format!("moment order {k} outside the region of existence")));
    }
    let m = &hop.malaga;
    let (xi, r) = (hop.pp.xi, hop.det.r);
    let (rf, xi2, alpha) = (r as f64, xi * xi, m.params.alpha);
    let rk = rf * k;
    let sum: f64 = m
        .b_n
        .iter()
        .enumerate()
        .map(|(i, b)| b * (ln_gamma(rk + i as f64 + 1.0)).exp())
        .sum();
    let ln_front = rf.ln() + 2.0 * xi.ln() + m.a_const.ln() + ln_gamma(rk + alpha)
        - rf * 2f64.ln()
        - (rk + xi2).ln()
        - rk * m.big_b(xi).ln()
        + k * hop.mu_eff().ln();
    Ok(ln_front.exp() * sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hop(r: u32, xi: f64) -> FsoHop {
        let pp = PointingPathParams { xi, a0: 1.0, sigma_atten: 0.0, l_km: 1.0 };
        FsoHop::new(&MalagaParams::reference(), pp, DetectionParams { r, mu_r: 10.0 }).unwrap()
    }

    #[test]
    fn reference_constants() {
        let d = derive_malaga(&MalagaParams::reference()).unwrap();
        assert!((d.g - 0.4768).abs() < 1e-12);
        assert!((d.omega_p - 2.0352).abs() < 1e-12);
        let (alpha, beta) = (4.2f64, 5.0f64);
        let a1 = ((d.g * beta + d.omega_p) * alpha / beta).sqrt();
        assert!((d.a_n[0] / a1 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn malaga_normalisation_constant() {
        // (A/2)·Γ(α)·Σ bₙΓ(n) = 1
        let d = derive_malaga(&MalagaParams::reference()).unwrap();
        let s: f64 = d.b_n.iter().enumerate().map(|(i, b)| b * ln_gamma(i as f64 + 1.0).exp()).sum();
        assert!((0.5 * d.a_const * ln_gamma(4.2).exp() * s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rho_one_is_degenerate() {
        let p = MalagaParams { rho: 1.0, ..MalagaParams::reference() };
        assert!(matches!(derive_malaga(&p), Err(Error::DegenerateParameters(_))));
    }

    #[test]
    fn path_and_pointing() {
        let pp = PointingPathParams { xi: 1.0, a0: 0.8, sigma_atten: 0.44, l_km: 1.0 };
        assert!((path_loss(&pp) - (-0.44f64).exp()).abs() < 1e-15);
        assert_eq!(pointing_gain(&pp, 2.0, 0.0), 0.8);
        assert!((pointing_gain(&pp, 2.0, 2.0) - 0.8 * (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn kernel_is_normalised() {
        for r in [1, 2] {
            for xi in [0.4, 0.9, 6.7] {
                let k = hop(r, xi).kernel();
                let v = k.ln_psi(Complex64::new(0.0, 0.0)).exp();
                assert!((v.re - 1.0).abs() < 1e-12 && v.im.abs() < 1e-14, "r={r} xi={xi}: {v}");
            }
        }
    }

    #[test]
    fn fused_cdf_matches_termwise() {
        for r in [1, 2] {
            for xi in [0.7, 6.7] {
                let h = hop(r, xi);
                for g in [1e-3, 0.1, 1.0, 10.0, 100.0] {
                    let a = cdf_gamma2(&h, g).unwrap();
                    let b = cdf_gamma2_termwise(&h, g).unwrap();
                    assert!((a - b).abs() <= 1e-9 * b.max(1e-3), "r={r} xi={xi} γ={g}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn geometry_limits() {
        let g = derive_geometry(&GeometryParams::reference(0.3)).unwrap();
        assert!(g.a0 > 0.0 && g.a0 < 1.0);
        let wide = derive_geometry(&GeometryParams { a_rx: 50.0, ..GeometryParams::reference(0.3) }).unwrap();
        assert!((wide.a0 - 1.0).abs() < 1e-12);
        let loose = derive_geometry(&GeometryParams::reference(1e3)).unwrap();
        assert!(loose.xi < 1e-3);
        assert!(derive_geometry(&GeometryParams::reference(0.0)).is_err());
    }
}

//! Bivariate Fox H-function by iterated Mellin–Barnes quadrature.
//!
//! H = (2πi)^{-2} ∫∫ φ(s,t) θ₁(s) θ₂(t) x^s y^t ds dt with
//!   φ  = ∏_{j<n₁} Γ(1−a_j+α_j s+A_j t) / [∏_{j≥n₁} Γ(a_j−α_j s−A_j t) ∏_j Γ(1−b_j+β_j s+B_j t)],
//!   θ₁ = ∏_{j<m₂} Γ(d_j−δ_j s) ∏_{j<n₂} Γ(1−c_j+γ_j s) / [∏_{j≥m₂} Γ(1−d_j+δ_j s) ∏_{j≥n₂} Γ(c_j−γ_j s)],
//! θ₂ likewise in t. The inner s-integral is done for every outer t-node.
//! Compute-intensive: expect ~10⁵ Gamma evaluations per call.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use super::gamma::ln_gamma_c;
use crate::error::{Error, Result};
use crate::quad::{integrate_breaks, Quad};

/// (coefficient, scale) pair of a single-variable H factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HPair {
    pub coeff: f64,
    pub scale: f64,
}

/// (coefficient; scale in s, scale in t) triple of the joint factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HTriple {
    pub coeff: f64,
    pub scale_s: f64,
    pub scale_t: f64,
}

/// One single-variable block: orders (m, n) and its upper/lower pair lists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HBlock {
    pub m: usize,
    pub n: usize,
    pub upper: Vec<HPair>,
    pub lower: Vec<HPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoxH2Spec {
    pub n1: usize,
    pub joint_upper: Vec<HTriple>,
    pub joint_lower: Vec<HTriple>,
    pub x_block: HBlock,
    pub y_block: HBlock,
}

fn pairs(v: &[f64]) -> Vec<HPair> {
    v.iter().map(|&c| HPair { coeff: c, scale: 1.0 }).collect()
}

impl HBlock {
    fn validate(&self, name: &str) -> Result<()> {
        if self.m > self.lower.len() || self.n > self.upper.len() {
            return Err(Error::InvalidParameter(format!("{name} block orders out of range")));
        }
        if self.upper.iter().chain(&self.lower).any(|p| !(p.scale > 0.0) || !p.coeff.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} block scales must be > 0")));
        }
        Ok(())
    }

    fn ln_theta(&self, s: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, p) in self.lower.iter().enumerate() {
            if j < self.m {
                acc += ln_gamma_c(-s * p.scale + p.coeff);
            } else {
                acc -= ln_gamma_c(one - p.coeff + s * p.scale);
            }
        }
        for (j, p) in self.upper.iter().enumerate() {
            if j < self.n {
                acc += ln_gamma_c(one - p.coeff + s * p.scale);
            } else {
                acc -= ln_gamma_c(-s * p.scale + p.coeff);
            }
        }
        acc
    }

    /// Slacks (real parts of numerator-Gamma arguments) at abscissa c.
    fn slacks(&self, c: f64) -> impl Iterator<Item = f64> + '_ {
        let l = self.lower[..self.m].iter().map(move |p| p.coeff - p.scale * c);
        let u = self.upper[..self.n].iter().map(move |p| 1.0 - p.coeff + p.scale * c);
        l.chain(u)
    }
}

impl FoxH2Spec {
    /// The capacity kernel: joint (0;1,1), x-block G^{1,1}_{1,1}(·|0;0),
    /// y-block G^{q,0}_{p,q}(·|upper; lower) with unit scales.
    pub fn capacity_kernel(upper: &[f64], lower: &[f64]) -> Result<Self> {
        let spec = FoxH2Spec {
            n1: 1,
            joint_upper: vec![HTriple { coeff: 0.0, scale_s: 1.0, scale_t: 1.0 }],
            joint_lower: vec![],
            x_block: HBlock { m: 1, n: 1, upper: pairs(&[0.0]), lower: pairs(&[0.0]) },
            y_block: HBlock { m: lower.len(), n: 0, upper: pairs(upper), lower: pairs(lower) },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.x_block.validate("x")?;
        self.y_block.validate("y")?;
        if self.n1 > self.joint_upper.len() {
            return Err(Error::InvalidParameter("n1 exceeds joint upper list".into()));
        }
        if self
            .joint_upper
            .iter()
            .chain(&self.joint_lower)
            .any(|p| !(p.scale_s > 0.0 && p.scale_t > 0.0) || !p.coeff.is_finite())
        {
            return Err(Error::InvalidParameter("joint scales must be > 0".into()));
        }
        Ok(())
    }

    fn ln_joint(&self, s: Complex64, t: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, p) in self.joint_upper.iter().enumerate() {
            let w = s * p.scale_s + t * p.scale_t;
            if j < self.n1 {
                acc += ln_gamma_c(one - p.coeff + w);
            } else {
                acc -= ln_gamma_c(-w + p.coeff);
            }
        }
        for p in &self.joint_lower {
            acc -= ln_gamma_c(one - p.coeff + s * p.scale_s + t * p.scale_t);
        }
        acc
    }

    fn min_slack(&self, cs: f64, ct: f64) -> f64 {
        let joint = self.joint_upper[..self.n1]
            .iter()
            .map(|p| 1.0 - p.coeff + p.scale_s * cs + p.scale_t * ct);
        joint
            .chain(self.x_block.slacks(cs))
            .chain(self.y_block.slacks(ct))
            .fold(f64::INFINITY, f64::min)
    }

    /// Contour abscissae maximising the smallest distance to a pole.
    pub fn contour(&self) -> Result<(f64, f64)> {
        let mut best = (0.0, 0.0);
        let mut best_v = f64::NEG_INFINITY;
        let mut half = 8.0;
        let mut centre = (0.0, 0.0);
        for _ in 0..6 {
            let n = 32;
            for i in 0..=n {
                for j in 0..=n {
                    let cs = centre.0 - half + 2.0 * half * i as f64 / n as f64;
                    let ct = centre.1 - half + 2.0 * half * j as f64 / n as f64;
                    let v = self.min_slack(cs, ct);
                    if v > best_v {
                        best_v = v;
                        best = (cs, ct);
                    }
                }
            }
            centre = best;
            half /= 8.0;
        }
        if !(best_v > 1e-6) {
            return Err(Error::UnsupportedParameters(
                "no straight contours separate the bivariate pole families".into(),
            ));
        }
        Ok(best)
    }
}

/// Truncation point of a decaying (in |σ|) integrand along one direction.
fn scan_extent(mut g: impl FnMut(f64) -> f64, dir: f64, step: f64, t_max: f64) -> Option<(f64, f64)> {
    let mut peak = 0.0f64;
    let mut mass = 0.0;
    let mut below = 0;
    let mut t = 0.0;
    while t <= t_max {
        let v = g(dir * t);
        if !v.is_finite() {
            return None;
        }
        peak = peak.max(v);
        mass += v * step;
        if t > 1.0 && v <= 1e-16 * peak {
            below += 1;
            if below >= 3 {
                return Some((t, mass));
            }
        } else {
            below = 0;
        }
        t += step;
    }
    None
}

fn panels(lo: f64, hi: f64, width: f64) -> Vec<f64> {
    let n = (((hi - lo) / width).ceil() as usize).clamp(2, 400);
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// Iterated contour integral with a caller-supplied outer factor:
/// (2πi)^{-2}∫∫ e^{ln_inner(s,t)} x^s · outer(t) ds dt, outer(t̄) = conj outer(t).
pub fn iterated_contour<I, O>(ln_inner: I, outer: O, x: f64, cs: f64, ct: f64, rel_tol: f64) -> Result<f64>
where
    I: Fn(Complex64, Complex64) -> Complex64,
    O: Fn(Complex64) -> Complex64,
{
    let ln_x = x.ln();
    let width_s = (3.0 / ln_x.abs().max(1e-9)).clamp(0.25, 2.0);
    let failure = std::cell::Cell::new(None::<Error>);

    // inner integral (1/2π)∫ f(cs+iσ, t) dσ for a fixed complex t
    let inner = |t: Complex64| -> Complex64 {
        let f = |sig: f64| {
            let s = Complex64::new(cs, sig);
            (ln_inner(s, t) + s * ln_x).exp()
        };
        let (Some((up, m1)), Some((dn, m2))) = (
            scan_extent(|u| f(u).norm(), 1.0, 0.25, 4000.0),
            scan_extent(|u| f(u).norm(), -1.0, 0.25, 4000.0),
        ) else {
            failure.set(Some(Error::AccuracyFailure {
                context: "inner contour truncation".into(),
                estimate: f64::INFINITY,
            }));
            return Complex64::new(f64::NAN, 0.0);
        };
        let mut breaks = panels(-dn, 0.0, width_s);
        breaks.extend(panels(0.0, up, width_s).into_iter().skip(1));
        let q = Quad { abs_tol: 3e-14 * (m1 + m2), rel_tol: rel_tol * 1e-2, max_intervals: 4000 };
        let re = integrate_breaks(|u| f(u).re, &breaks, &q);
        let im = integrate_breaks(|u| f(u).im, &breaks, &q);
        if !(re.converged && im.converged) {
            failure.set(Some(Error::AccuracyFailure {
                context: "inner contour quadrature".into(),
                estimate: (re.error + im.error) / (re.value.abs() + im.value.abs()).max(1e-300),
            }));
        }
        Complex64::new(re.value, im.value) / (2.0 * PI)
    };

    let g = |tau: f64| {
        let t = Complex64::new(ct, tau);
        inner(t) * outer(t)
    };
    let (upper, mass) = scan_extent(|u| g(u).norm(), 1.0, 0.5, 2000.0).ok_or_else(|| Error::AccuracyFailure {
        context: "outer contour truncation".into(),
        estimate: f64::INFINITY,
    })?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let breaks = panels(0.0, upper, 1.0);
    let q = Quad { abs_tol: 3e-14 * mass, rel_tol, max_intervals: 2000 };
    let r = integrate_breaks(|u| g(u).re / PI, &breaks, &q);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    if !r.converged {
        return Err(Error::AccuracyFailure {
            context: "outer contour quadrature".into(),
            estimate: r.error / r.value.abs().max(1e-300),
        });
    }
    Ok(r.value)
}

/// H^{0,n₁:m₂,n₂:m₃,n₃}_{p₁,q₁:p₂,q₂:p₃,q₃}(x, y). Relative accuracy target 1e−5.
pub fn fox_h_bivariate(spec: &FoxH2Spec, x: f64, y: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::Domain(format!("fox_h_bivariate requires x, y > 0 (got {x}, {y})")));
    }
    spec.validate()?;
    let (cs, ct) = spec.contour()?;
    let ln_y = y.ln();
    iterated_contour(
        |s, t| spec.ln_joint(s, t) + spec.x_block.ln_theta(s),
        |t| (spec.y_block.ln_theta(t) + t * ln_y).exp(),
        x,
        cs,
        ct,
        1e-7,
    )
}

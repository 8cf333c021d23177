//! Numerical Mellin–Barnes integration along vertical lines, plus the
//! pieces needed to place contours and to evaluate residues numerically.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{integrate_breaks, Quad};

/// Outcome of a contour integral: value, quadrature error estimate and the
/// L¹ mass of the integrand along the line (a cancellation indicator).
#[derive(Debug, Clone, Copy)]
pub struct LineIntegral {
    pub value: f64,
    pub error: f64,
    pub mass: f64,
}

const T_MAX: f64 = 4000.0;
const DECAY: f64 = 1e-17;

/// (1/2πi)∫_{c−i∞}^{c+i∞} f(s) ds for an integrand with f(s̄) = conj f(s),
/// computed as (1/π)∫₀^∞ Re f(c+it) dt.
///
/// `ln_z` is only a hint for the oscillation frequency (the integrand usually
/// carries a z^s factor) and controls the initial panel width.
pub fn vertical_line_integral<F>(f: F, c: f64, ln_z: f64, rel_tol: f64) -> Result<LineIntegral>
where
    F: Fn(Complex64) -> Complex64,
{
    // far-left contours (large arguments) decay on a scale ∝ |c|
    let h = 0.25 * (1.0 + c.abs() / 10.0);
    let mut peak = 0.0f64;
    let mut mass = 0.0;
    let mut below = 0;
    let mut t = 0.0;
    let mut upper = None;
    while t <= T_MAX {
        let v = f(Complex64::new(c, t)).norm();
        if !v.is_finite() {
            return Err(Error::Range(format!("contour integrand overflow at s = {c}+{t}i")));
        }
        mass += v * h;
        peak = peak.max(v);
        if t > 1.0 && v <= DECAY * peak {
            below += 1;
            if below >= 4 {
                upper = Some(t);
                break;
            }
        } else {
            below = 0;
        }
        t += h;
    }
    let upper = match upper {
        Some(u) => u,
        None => {
            return Err(Error::AccuracyFailure {
                context: format!("contour truncation did not converge by t = {T_MAX}"),
                estimate: f64::INFINITY,
            })
        }
    };
    mass /= PI;
    if peak == 0.0 {
        return Ok(LineIntegral { value: 0.0, error: 0.0, mass: 0.0 });
    }

    let width = (3.0 / ln_z.abs().max(1e-9)).clamp(0.25, 2.0).max(upper / 400.0);
    let mut breaks = vec![0.0, 0.05, 0.2, 0.5];
    let mut b = 1.0;
    while b < upper {
        breaks.push(b);
        b += width;
    }
    breaks.push(upper);
    breaks.retain(|&x| x <= upper);
    breaks.dedup();

    // just above the Kronrod roundoff floor (≈ 50ε·∫|f|); anything tighter only burns the budget
    let q = Quad { abs_tol: 3e-14 * mass, rel_tol, max_intervals: 20_000 };
    let r = integrate_breaks(|t| f(Complex64::new(c, t)).re / PI, &breaks, &q);
    if !r.converged {
        return Err(Error::AccuracyFailure {
            context: "contour quadrature".into(),
            estimate: r.error / r.value.abs().max(f64::MIN_POSITIVE),
        });
    }
    Ok(LineIntegral { value: r.value, error: r.error, mass })
}

/// Residue of `f` at `pole` by the trapezoidal rule on a circle of radius
/// `radius`, exact up to (radius/d)^n where d is the distance to the
/// nearest other singularity.
pub fn numeric_residue<F>(f: F, pole: f64, radius: f64, n: usize) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let theta = 2.0 * PI * (k as f64 + 0.5) / n as f64;
        let w = Complex64::from_polar(radius, theta);
        acc += f(Complex64::new(pole, 0.0) + w) * w;
    }
    acc / n as f64
}

/// Minimise a (log-magnitude) function on [lo, hi]: coarse grid then golden
/// section around the best grid point.
pub fn minimise_on(phi: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    if hi - lo < 1e-12 {
        return 0.5 * (lo + hi);
    }
    let n = 24;
    let step = (hi - lo) / n as f64;
    let mut best = lo;
    let mut best_v = f64::INFINITY;
    for i in 0..=n {
        let x = lo + step * i as f64;
        let v = phi(x);
        if v < best_v {
            best_v = v;
            best = x;
        }
    }
    let (mut a, mut b) = ((best - step).max(lo), (best + step).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (phi(x1), phi(x2));
    for _ in 0..40 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = phi(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = phi(x2);
        }
    }
    let x = 0.5 * (a + b);
    if phi(x) <= best_v { x } else { best }
}

/// Like [`minimise_on`] on (−∞, hi]: starts with [hi − 30, hi] and keeps
/// pushing the left end out while the minimum sits on it (large arguments put
/// the saddle far to the left).
pub fn minimise_left_open(phi: impl Fn(f64) -> f64, hi: f64) -> f64 {
    let mut width = 30.0;
    loop {
        let lo = hi - width;
        let c = minimise_on(&phi, lo, hi);
        if c > lo + 1e-3 * width || width >= 1e5 {
            return c;
        }
        width *= 4.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma::ln_gamma_c;

    #[test]
    fn exponential_from_gamma() {
        // e^{−z} = (1/2πi)∫Γ(−s) z^s ds, c < 0
        let z: f64 = 2.0;
        let f = |s: Complex64| (ln_gamma_c(-s) + s * z.ln()).exp();
        let r = vertical_line_integral(f, -0.5, z.ln(), 1e-12).unwrap();
        assert!((r.value - (-z).exp()).abs() < 1e-13, "{r:?}");
    }

    #[test]
    fn residue_of_gamma_at_minus_two() {
        let f = |s: Complex64| ln_gamma_c(s).exp();
        let r = numeric_residue(f, -2.0, 0.4, 64);
        assert!((r.re - 0.5).abs() < 1e-13 && r.im.abs() < 1e-13, "{r}");
    }

    #[test]
    fn minimiser_finds_parabola_vertex() {
        let x = minimise_on(|x| (x - 0.3).powi(2), -2.0, 1.0);
        assert!((x - 0.3).abs() < 1e-6);
        let y = minimise_left_open(|x| (x + 500.0).powi(2), 0.0);
        assert!((y + 500.0).abs() < 1e-3, "{y}");
    }
}

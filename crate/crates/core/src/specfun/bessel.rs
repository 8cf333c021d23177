//! Modified Bessel function of the second kind for real (fractional) order.
//!
//! K_ν(x) = ∫₀^∞ e^{−x cosh t} cosh(νt) dt, integrated in the log domain around
//! the saddle sinh t* = |ν|/x. No recurrences, so non-integer ν is no special case.

use crate::error::{Error, Result};
use crate::quad::{integrate_breaks, Quad};

/// ln K_ν(x) for x > 0.
pub fn ln_bessel_k(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("bessel_k requires x > 0, got {x}")));
    }
    if !nu.is_finite() {
        return Err(Error::Domain(format!("bessel_k order must be finite, got {nu}")));
    }
    let nu = nu.abs();
    let t_star = (nu / x).asinh();
    let phase = |t: f64| -x * t.cosh() + nu * t;
    let peak = phase(t_star);
    let curvature = x * t_star.cosh();
    let sigma = 1.0 / curvature.sqrt();

    // walk right until the integrand is e^{-60} below its peak
    let mut upper = t_star + sigma;
    while phase(upper) - peak > -60.0 {
        upper += sigma.max(0.05 * upper);
    }
    let mut breaks = vec![0.0];
    for k in [-4.0, -1.0, 0.0, 1.0, 4.0] {
        let b = t_star + k * sigma;
        if b > 0.0 && b < upper {
            breaks.push(b);
        }
    }
    breaks.push(upper);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let f = |t: f64| {
        // cosh(νt)e^{−x cosh t} = ½e^{−x cosh t+νt}(1+e^{−2νt})
        0.5 * (phase(t) - peak).exp() * (1.0 + (-2.0 * nu * t).exp())
    };
    // 1e−13: the Kronrod error floor (50ε per panel) makes tighter targets unreachable
    let r = integrate_breaks(f, &breaks, &Quad::new(0.0, 1e-13));
    if !(r.value > 0.0) || r.error > 1e-11 * r.value {
        return Err(Error::AccuracyFailure {
            context: format!("bessel_k(ν={nu}, x={x})"),
            estimate: r.error / r.value.abs().max(f64::MIN_POSITIVE),
        });
    }
    Ok(peak + r.value.ln())
}

/// K_ν(x) for x > 0. Returns a range error if the value overflows f64.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    let l = ln_bessel_k(nu, x)?;
    if l > f64::MAX.ln() {
        return Err(Error::Range(format!("K_{nu}({x}) overflows (ln K = {l:.1})")));
    }
    Ok(l.exp())
}

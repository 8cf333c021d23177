//! Gamma function family for real and complex arguments.
//!
//! Lanczos (g = 607/128, 15 terms) near the origin, Stirling's series for
//! |z| ≥ 10, reflection for Re z < ½. The complex logarithm is only meaningful
//! modulo 2πi; every caller exponentiates, so the branch does not matter.

use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_091_82,
    57.156_235_665_862_923_517,
    -59.597_960_355_475_491_248,
    14.136_097_974_741_747_174,
    -0.491_913_816_097_620_199_78,
    0.339_946_499_848_118_886_99e-4,
    0.465_236_289_270_485_756_65e-4,
    -0.983_744_753_048_795_646_77e-4,
    0.158_088_703_224_912_488_84e-3,
    -0.210_264_441_724_104_883_19e-3,
    0.217_439_618_115_212_643_20e-3,
    -0.164_318_106_536_763_890_22e-3,
    0.844_182_239_838_527_432_93e-4,
    -0.261_908_384_015_814_086_70e-4,
    0.368_991_826_595_316_227_04e-5,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_78;

// B_{2k} / (2k(2k−1)), k = 1..8
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

fn stirling_c(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    for c in STIRLING.iter().rev() {
        series = series * inv2 + *c;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series * inv
}

fn lanczos_c(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + x.ln()
}

/// ln sin(πz), evaluated without overflow for large |Im z|.
pub fn ln_sin_pi(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    if z.im.abs() < 1.0 {
        return (z * PI).sin().ln();
    }
    if z.im > 0.0 {
        // sin πz = (i/2)·e^{−iπz}·(1 − e^{2iπz})
        Complex64::new(-std::f64::consts::LN_2, 0.5 * PI) - i * PI * z
            + (Complex64::new(1.0, 0.0) - (i * 2.0 * PI * z).exp()).ln()
    } else {
        // sin πz = (1/2i)·e^{iπz}·(1 − e^{−2iπz})
        Complex64::new(-std::f64::consts::LN_2, -0.5 * PI) + i * PI * z
            + (Complex64::new(1.0, 0.0) - (-i * 2.0 * PI * z).exp()).ln()
    }
}

/// ln Γ(z) for complex z. At the poles z = 0, −1, −2, … the real part is +∞,
/// so `(-ln_gamma_c(z)).exp()` is the (correct) zero of 1/Γ.
pub fn ln_gamma_c(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let w = Complex64::new(1.0, 0.0) - z;
        return Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma_c(w);
    }
    if z.norm_sqr() >= 100.0 {
        stirling_c(z)
    } else {
        lanczos_c(z)
    }
}

/// ln|Γ(x)| for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    ln_gamma_signed(x).0
}

/// (ln|Γ(x)|, sign Γ(x)) for any real x; poles give (+∞, NaN).
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if x <= 0.0 && x == x.floor() {
        return (f64::INFINITY, f64::NAN);
    }
    if x < 0.5 {
        let s = (PI * x).sin();
        let (l, sg) = ln_gamma_signed(1.0 - x);
        return (PI.ln() - s.abs().ln() - l, sg * s.signum());
    }
    let v = if x >= 10.0 {
        stirling_c(Complex64::new(x, 0.0)).re
    } else {
        lanczos_c(Complex64::new(x, 0.0)).re
    };
    (v, 1.0)
}

/// Γ(x) for real x (±∞/NaN at the poles, overflow to ∞ beyond ≈171.6).
pub fn gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return f64::NAN;
    }
    if x > 0.0 && x == x.floor() && x <= 30.0 {
        // exact factorials
        let mut p = 1.0;
        let mut k = 2.0;
        while k < x {
            p *= k;
            k += 1.0;
        }
        return p;
    }
    let (l, s) = ln_gamma_signed(x);
    s * l.exp()
}

/// ln C(n, k) for 0 ≤ k ≤ n.
pub fn ln_binomial(n: u32, k: u32) -> f64 {
    assert!(k <= n);
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// C(n, k) as a float, exact for small arguments.
pub fn binomial(n: u32, k: u32) -> f64 {
    assert!(k <= n);
    if n <= 100 {
        let k = k.min(n - k);
        let mut c: u128 = 1;
        for i in 0..k as u128 {
            c = c * (n as u128 - i) / (i + 1);
        }
        return c as f64;
    }
    ln_binomial(n, k).exp().round()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials_and_half_integers() {
        assert_eq!(gamma(5.0), 24.0);
        let half = gamma(0.5);
        assert!((half - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
        assert!((gamma(4.2) - 7.756_689_535_793_181).abs() < 1e-12);
        assert!(gamma(0.0).is_nan());
    }

    #[test]
    fn complex_matches_real_on_axis() {
        for &x in &[0.1, 0.7, 1.3, 4.2, 9.9, 10.1, 33.3, -0.4, -2.7] {
            let (l, _) = ln_gamma_signed(x);
            let c = ln_gamma_c(Complex64::new(x, 0.0));
            assert!((c.re - l).abs() < 1e-12 * l.abs().max(1.0), "x={x}: {} vs {l}", c.re);
        }
    }

    #[test]
    fn recurrence_in_complex_plane() {
        for &(x, y) in &[(0.3, 2.0), (-3.4, 7.5), (2.0, -40.0), (0.5, 300.0), (-12.2, -0.4)] {
            let z = Complex64::new(x, y);
            let lhs = (ln_gamma_c(z + 1.0) - ln_gamma_c(z)).exp();
            assert!((lhs - z).norm() < 1e-11 * z.norm(), "z={z}: {lhs}");
        }
    }

    #[test]
    fn modulus_on_critical_line() {
        // |Γ(½ + iy)|² = π / cosh(πy)
        for &y in &[0.5, 3.0, 20.0, 150.0] {
            let l = ln_gamma_c(Complex64::new(0.5, y)).re;
            let expected = 0.5 * (PI.ln() - (PI * y).cosh().ln());
            assert!((l - expected).abs() < 1e-11 * expected.abs().max(1.0), "y={y}");
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534.0);
        assert!((ln_binomial(3, 1) - 3f64.ln()).abs() < 1e-14);
    }
}

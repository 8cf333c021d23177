//! Independent reference implementations used only by the test-suite.
//!
//! Nothing here calls into `rfso_core` numerics: Gamma comes from `statrs`,
//! series are summed directly, integrals use plain composite Simpson rules.
#![allow(dead_code)]

use statrs::function::gamma::gamma as sgamma;

/// Γ(x) for any real non-pole x (reflection below ½).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * sgamma(1.0 - x))
    } else {
        sgamma(x)
    }
}

/// 1/Γ(x), zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && (x - x.round()).abs() < 1e-14 {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

/// Generalised hypergeometric pFq(a; b; x) by direct summation.
pub fn hyp_pfq(a: &[f64], b: &[f64], x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut biggest = 1.0f64;
    for k in 0..5000 {
        let kf = k as f64;
        let mut ratio = x / (kf + 1.0);
        for &ai in a {
            ratio *= ai + kf;
        }
        for &bi in b {
            ratio /= bi + kf;
        }
        term *= ratio;
        sum += term;
        biggest = biggest.max(term.abs());
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && k > 5 {
            break;
        }
    }
    assert!(biggest < 1e8 * sum.abs().max(1e-300), "hypergeometric series cancels badly");
    sum
}

/// Slater's theorem: G^{m,n}_{p,q}(z) as a sum of m hypergeometric series,
/// valid when the first m lower parameters differ pairwise by non-integers.
pub fn meijer_slater(m: usize, n: usize, a: &[f64], b: &[f64], z: f64) -> f64 {
    let (p, q) = (a.len(), b.len());
    let sign = if (p as i64 - m as i64 - n as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let mut total = 0.0;
    for h in 0..m {
        let bh = b[h];
        let mut coef = 1.0;
        for j in 0..m {
            if j != h {
                coef *= gamma(b[j] - bh);
            }
        }
        for j in 0..n {
            coef *= gamma(1.0 + bh - a[j]);
        }
        for j in m..q {
            coef *= rgamma(1.0 + bh - b[j]);
        }
        for j in n..p {
            coef *= rgamma(a[j] - bh);
        }
        let up: Vec<f64> = a.iter().map(|aj| 1.0 + bh - aj).collect();
        let low: Vec<f64> = (0..q).filter(|&j| j != h).map(|j| 1.0 + bh - b[j]).collect();
        total += coef * z.powf(bh) * hyp_pfq(&up, &low, sign * z);
    }
    total
}

/// Coincident-pole fallback: average of Slater sums at symmetric parameter
/// perturbations ±ε of `b[idx]` with Richardson extrapolation (error O(ε⁴)).
pub fn meijer_slater_perturbed(m: usize, n: usize, a: &[f64], b: &[f64], idx: usize, z: f64) -> f64 {
    let eval = |eps: f64| {
        let mut bp = b.to_vec();
        bp[idx] += eps;
        let mut bm = b.to_vec();
        bm[idx] -= eps;
        0.5 * (meijer_slater(m, n, a, &bp, z) + meijer_slater(m, n, a, &bm, z))
    };
    let h = 2e-3;
    (4.0 * eval(h) - eval(2.0 * h)) / 3.0
}

/// I_ν(x) power series.
pub fn bessel_i_series(nu: f64, x: f64) -> f64 {
    let mut sum = 0.0;
    let half = 0.5 * x;
    for k in 0..400 {
        let kf = k as f64;
        let t = (half.ln() * (2.0 * kf + nu)).exp() * rgamma(kf + 1.0) * rgamma(kf + nu + 1.0);
        sum += t;
        if t.abs() < 1e-18 * sum.abs() && k > 3 {
            break;
        }
    }
    sum
}

/// K_ν(x) = π/2·(I_{−ν} − I_ν)/sin νπ for non-integer ν.
pub fn bessel_k_series(nu: f64, x: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 * (bessel_i_series(-nu, x) - bessel_i_series(nu, x))
        / (nu * std::f64::consts::PI).sin()
}

/// erfc(x) for x ≥ 0: Maclaurin series below 2, Lentz continued fraction above.
pub fn erfc_ref(x: f64) -> f64 {
    assert!(x >= 0.0);
    if x < 2.0 {
        let mut term = x;
        let mut sum = x;
        for k in 1..200 {
            term *= -x * x / k as f64;
            let add = term / (2 * k + 1) as f64;
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum
    } else {
        // erfc x = e^{−x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …))))
        let mut f = x;
        let tiny = 1e-300;
        let mut c = f;
        let mut d = 0.0;
        for k in 1..300 {
            let an = k as f64 * 0.5;
            d = x + an * d;
            d = if d.abs() < tiny { tiny } else { d };
            c = x + an / c;
            c = if c.abs() < tiny { tiny } else { c };
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x * x).exp() / (std::f64::consts::PI.sqrt() * f)
    }
}

/// Composite Simpson on [a, b] with n (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + h * i as f64);
    }
    s * h / 3.0
}

/// ∫₀^∞ f by Simpson in the variable u with x = e^u over [u_lo, u_hi].
pub fn simpson_log(f: impl Fn(f64) -> f64, x_lo: f64, x_hi: f64, n: usize) -> f64 {
    simpson(|u| {
        let x = u.exp();
        f(x) * x
    }, x_lo.ln(), x_hi.ln(), n)
}

/// Deterministic xorshift for randomised test instances (independent of rand).
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
    }
    pub fn uniform(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

//! Meijer G-function G^{m,n}_{p,q}(z | a; b) for real positive z.
//!
//! Primary path: Mellin–Barnes contour quadrature. Secondary path: the
//! residue series obtained by closing the contour to the right, used for
//! small-argument asymptotics.

use num_complex::Complex64;
use serde::Serialize;

use super::gamma::{ln_gamma_c, ln_gamma_signed};
use super::mellin::{minimise_left_open, minimise_on, numeric_residue, vertical_line_integral};
use crate::error::{Error, Result};

/// Orders and parameters of G^{m,n}_{p,q}; p = a.len(), q = b.len().
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeijerGSpec {
    pub m: usize,
    pub n: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Pole locations closer than this are treated as coincident.
const COINCIDE: f64 = 1e-9;

fn is_nonneg_integer(x: f64) -> bool {
    x > -COINCIDE && (x - x.round()).abs() < COINCIDE
}

impl MeijerGSpec {
    pub fn new(m: usize, n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let (p, q) = (a.len(), b.len());
        if m > q || n > p {
            return Err(Error::InvalidParameter(format!(
                "G^{{{m},{n}}}_{{{p},{q}}}: need m ≤ q and n ≤ p"
            )));
        }
        if p > q {
            return Err(Error::UnsupportedParameters(format!("p = {p} > q = {q}")));
        }
        if a.iter().chain(&b).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite Meijer-G parameter".into()));
        }
        if m == 0 {
            return Err(Error::UnsupportedParameters("m = 0 is not supported".into()));
        }
        Ok(MeijerGSpec { m, n, a, b })
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }
    pub fn q(&self) -> usize {
        self.b.len()
    }

    /// ln of the Gamma-ratio kernel, without the z^s factor.
    pub fn ln_kernel(&self, s: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &b) in self.b.iter().enumerate() {
            if j < self.m {
                acc += ln_gamma_c(-s + b);
            } else {
                acc -= ln_gamma_c(one - b + s);
            }
        }
        for (j, &a) in self.a.iter().enumerate() {
            if j < self.n {
                acc += ln_gamma_c(one - a + s);
            } else {
                acc -= ln_gamma_c(-s + a);
            }
        }
        acc
    }

    fn integrand(&self, s: Complex64, ln_z: f64) -> Complex64 {
        (self.ln_kernel(s) + s * ln_z).exp()
    }

    /// Decay exponent of the kernel along vertical lines: m + n − (p+q)/2.
    pub fn decay_exponent(&self) -> f64 {
        (self.m + self.n) as f64 - 0.5 * (self.p() + self.q()) as f64
    }

    fn right_heads(&self) -> &[f64] {
        &self.b[..self.m]
    }

    /// Left-family poles start at a_j − 1.
    fn left_heads(&self) -> Vec<f64> {
        self.a[..self.n].iter().map(|a| a - 1.0).collect()
    }

    /// Every pole location (right family, left family) within the window.
    fn poles_in(&self, lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
        let mut right = Vec::new();
        for &b in self.right_heads() {
            let mut k = 0.0;
            while b + k < hi {
                if b + k > lo {
                    right.push(b + k);
                }
                k += 1.0;
            }
        }
        let mut left = Vec::new();
        for h in self.left_heads() {
            let mut k = 0.0;
            while h - k > lo {
                if h - k < hi {
                    left.push(h - k);
                }
                k += 1.0;
            }
        }
        for v in [&mut right, &mut left] {
            v.sort_by(f64::total_cmp);
            v.dedup_by(|x, y| (*x - *y).abs() < COINCIDE);
        }
        (right, left)
    }
}

/// Separate the pole families: the leftmost right-family head must sit to the
/// right of the rightmost left-family head, or the two may not collide.
fn check_families(spec: &MeijerGSpec) -> Result<()> {
    for &b in spec.right_heads() {
        for h in spec.left_heads() {
            // a right pole b + k equals a left pole h − k' iff h − b ∈ ℕ₀
            if is_nonneg_integer(h - b) {
                return Err(Error::UnsupportedParameters(format!(
                    "pole families collide (a − b = {} is a positive integer)",
                    h + 1.0 - b
                )));
            }
        }
    }
    Ok(())
}

/// Abscissa and the finite set of poles lying on the wrong side of it.
struct Contour {
    c: f64,
    misplaced_right: Vec<f64>,
    misplaced_left: Vec<f64>,
}

fn place_contour(spec: &MeijerGSpec, ln_z: f64) -> Contour {
    let hi = spec.right_heads().iter().cloned().fold(f64::INFINITY, f64::min);
    let lo = spec.left_heads().into_iter().fold(f64::NEG_INFINITY, f64::max);
    let phi = |c: f64| spec.ln_kernel(Complex64::new(c, 0.0)).re + c * ln_z;
    if lo < hi {
        let gap = hi - lo;
        let margin = (0.25 * gap).min(0.1);
        let c = if lo.is_finite() {
            minimise_on(phi, lo + margin, hi - margin)
        } else {
            minimise_left_open(phi, hi - margin)
        };
        return Contour { c, misplaced_right: vec![], misplaced_left: vec![] };
    }
    // Interleaved families: run the line between them and detour around the
    // poles that end up on the wrong side.
    let mut c = 0.5 * (hi + lo);
    let (r, l) = spec.poles_in(c - 2.0, c + 2.0);
    let near = |x: f64| r.iter().chain(&l).any(|p| (p - x).abs() < 0.1);
    let mut shift = 0.0;
    while near(c + shift) && shift < 1.0 {
        shift = if shift <= 0.0 { -shift + 0.05 } else { -shift };
    }
    c += shift;
    let (right, _) = spec.poles_in(hi - 0.5, c);
    let (_, left) = spec.poles_in(c, lo + 0.5);
    let misplaced_right = right.into_iter().filter(|&p| p < c).collect();
    let misplaced_left = left.into_iter().filter(|&p| p > c).collect();
    Contour { c, misplaced_right, misplaced_left }
}

/// Distance from `p` to the nearest other pole of either family.
fn isolation(spec: &MeijerGSpec, p: f64) -> f64 {
    let (r, l) = spec.poles_in(p - 2.0, p + 2.0);
    r.iter()
        .chain(&l)
        .filter(|&&x| (x - p).abs() > COINCIDE)
        .map(|x| (x - p).abs())
        .fold(1.0, f64::min)
}

fn residue_at(spec: &MeijerGSpec, p: f64, ln_z: f64) -> f64 {
    let radius = 0.4 * isolation(spec, p).min(0.75);
    numeric_residue(|s| spec.integrand(s, ln_z), p, radius, 96).re
}

/// G^{m,n}_{p,q}(z) by contour quadrature. Relative accuracy ≈ 1e−10 on the
/// shapes used in this crate.
pub fn meijer_g(spec: &MeijerGSpec, z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("meijer_g requires z > 0, got {z}")));
    }
    if spec.decay_exponent() <= 0.0 {
        return Err(Error::UnsupportedParameters(format!(
            "contour integral does not converge absolutely (m+n−(p+q)/2 = {})",
            spec.decay_exponent()
        )));
    }
    check_families(spec)?;
    let ln_z = z.ln();
    let contour = place_contour(spec, ln_z);
    let line = vertical_line_integral(|s| spec.integrand(s, ln_z), contour.c, ln_z, 1e-12)?;
    let mut value = line.value;
    for &p in &contour.misplaced_right {
        value -= residue_at(spec, p, ln_z);
    }
    for &p in &contour.misplaced_left {
        value += residue_at(spec, p, ln_z);
    }
    let rel = line.error / value.abs().max(f64::MIN_POSITIVE);
    if rel > 1e-7 {
        return Err(Error::AccuracyFailure {
            context: format!("meijer_g at z = {z:e} (mass {:.2e})", line.mass),
            estimate: rel,
        });
    }
    Ok(value)
}

/// Contribution −Res of a simple right-family pole s₀ = b_v + k, in closed form:
/// (−1)^k/k! · [∏_{j≠v} Γ(b_j − s₀) ∏ Γ(1 − a_j + s₀)] / [∏ Γ(1 − b_j + s₀) ∏ Γ(a_j − s₀)] · z^{s₀}.
fn simple_pole_term(spec: &MeijerGSpec, v: usize, k: u32, ln_z: f64) -> f64 {
    let s0 = spec.b[v] + k as f64;
    let mut ln = s0 * ln_z;
    let mut sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    ln -= ln_gamma_signed(k as f64 + 1.0).0;
    let mut add = |x: f64, num: bool| {
        let (l, s) = ln_gamma_signed(x);
        if num {
            ln += l;
        } else {
            if l.is_infinite() {
                // 1/Γ at a pole vanishes
                ln = f64::NEG_INFINITY;
                return;
            }
            ln -= l;
        }
        sign *= s;
    };
    for (j, &b) in spec.b.iter().enumerate() {
        if j == v {
            continue;
        }
        if j < spec.m {
            add(b - s0, true);
        } else {
            add(1.0 - b + s0, false);
        }
    }
    for (j, &a) in spec.a.iter().enumerate() {
        if j < spec.n {
            add(1.0 - a + s0, true);
        } else {
            add(a - s0, false);
        }
    }
    if ln == f64::NEG_INFINITY {
        0.0
    } else {
        sign * ln.exp()
    }
}

fn has_coincident_heads(spec: &MeijerGSpec) -> bool {
    let h = spec.right_heads();
    (0..h.len()).any(|i| (0..i).any(|j| {
        let d = h[i] - h[j];
        (d - d.round()).abs() < COINCIDE
    }))
}

/// Leading small-argument expansion: one residue per lower parameter b_v,
/// v ≤ m, i.e. Σ_v ∏_{j≠v}Γ(b_j−b_v)·… / … · z^{b_v}. Requires simple poles.
pub fn meijer_g_small_arg(spec: &MeijerGSpec, z: f64) -> Result<f64> {
    meijer_g_small_arg_order(spec, z, 0)
}

/// As [`meijer_g_small_arg`] but keeping the residues b_v + k for k ≤ `order`.
pub fn meijer_g_small_arg_order(spec: &MeijerGSpec, z: f64, order: u32) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("meijer_g_small_arg requires z > 0, got {z}")));
    }
    if has_coincident_heads(spec) {
        return Err(Error::DegenerateParameters(format!(
            "lower parameters {:?} contain poles differing by an integer",
            spec.right_heads()
        )));
    }
    let ln_z = z.ln();
    let mut sum = 0.0;
    for v in 0..spec.m {
        for k in 0..=order {
            sum += simple_pole_term(spec, v, k, ln_z);
        }
    }
    Ok(sum)
}

/// Residue sum over every right-family pole location below
/// `max_b + order + ½`, handling coincident (higher-order) poles by numeric
/// contour residues. With p < q this is the convergent series for G, truncated.
pub fn meijer_g_residue_sum(spec: &MeijerGSpec, z: f64, order: u32) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("residue sum requires z > 0, got {z}")));
    }
    check_families(spec)?;
    let ln_z = z.ln();
    let heads = spec.right_heads();
    let min_head = heads.iter().cloned().fold(f64::INFINITY, f64::min);
    let limit = min_head + order as f64 + 0.5;
    let (locations, _) = spec.poles_in(min_head - 0.5, limit);
    let mut sum = 0.0;
    for p in locations {
        let owners: Vec<(usize, u32)> = heads
            .iter()
            .enumerate()
            .filter(|(_, &b)| is_nonneg_integer(p - b))
            .map(|(v, &b)| (v, (p - b).round() as u32))
            .collect();
        if owners.len() == 1 {
            sum += simple_pole_term(spec, owners[0].0, owners[0].1, ln_z);
        } else {
            sum -= residue_at(spec, p, ln_z);
        }
    }
    Ok(sum)
}

/// z^p·Σ_j log_coeffs[j]·(ln z)^j — one pole location of a residue expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTerm {
    pub exponent: f64,
    pub log_coeffs: Vec<f64>,
}

impl ExpansionTerm {
    pub fn eval(&self, z: f64) -> f64 {
        let l = z.ln();
        let mut acc = 0.0;
        for c in self.log_coeffs.iter().rev() {
            acc = acc * l + c;
        }
        acc * z.powf(self.exponent)
    }
}

/// The textbook leading expansion: one term per right-family head b_v
/// (v < m). A head that lands on a pole of another family is a higher-order
/// pole; its Laurent coefficients (hence the ln z powers) are taken
/// numerically on a small circle.
pub fn meijer_g_head_expansion(spec: &MeijerGSpec) -> Result<Vec<ExpansionTerm>> {
    check_families(spec)?;
    let heads = spec.right_heads();
    let mut locations: Vec<f64> = heads.to_vec();
    locations.sort_by(f64::total_cmp);
    locations.dedup_by(|x, y| (*x - *y).abs() < COINCIDE);
    let mut out = Vec::with_capacity(locations.len());
    for p in locations {
        let owners: Vec<usize> = (0..heads.len()).filter(|&v| is_nonneg_integer(p - heads[v])).collect();
        if owners.len() == 1 {
            out.push(ExpansionTerm { exponent: p, log_coeffs: vec![simple_pole_term(spec, owners[0], 0, 0.0)] });
            continue;
        }
        let radius = 0.4 * isolation(spec, p).min(0.75);
        let mut fact = 1.0;
        let log_coeffs = (0..owners.len())
            .map(|j| {
                if j > 0 {
                    fact *= j as f64;
                }
                let s0 = Complex64::new(p, 0.0);
                let c = numeric_residue(|s| spec.integrand(s, 0.0) * (s - s0).powi(j as i32), p, radius, 128);
                -c.re / fact
            })
            .collect();
        out.push(ExpansionTerm { exponent: p, log_coeffs });
    }
    Ok(out)
}

/// [`meijer_g_head_expansion`] summed at z.
pub fn meijer_g_head_residues(spec: &MeijerGSpec, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("head residues require z > 0, got {z}")));
    }
    Ok(meijer_g_head_expansion(spec)?.iter().map(|t| t.eval(z)).sum())
}

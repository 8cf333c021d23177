//! Special functions: Gamma family, Bessel-K, Gaussian-Q, Meijer-G and the
//! bivariate Fox-H, all real-argument and double precision.

pub mod bessel;
pub mod foxh;
pub mod gamma;
pub mod meijer;
pub mod mellin;

pub use bessel::{bessel_k, ln_bessel_k};
pub use foxh::{fox_h_bivariate, FoxH2Spec, HBlock, HPair, HTriple};
pub use gamma::{binomial, gamma, ln_binomial, ln_gamma, ln_gamma_c, ln_gamma_signed};
pub use meijer::{meijer_g, meijer_g_head_expansion, meijer_g_head_residues, ExpansionTerm, meijer_g_residue_sum, meijer_g_small_arg, meijer_g_small_arg_order, MeijerGSpec};

/// Δ(j; x) = [x/j, (x+1)/j, …, (x+j−1)/j].
pub fn delta_vec(j: usize, x: f64) -> Vec<f64> {
    assert!(j >= 1, "delta_vec needs j ≥ 1");
    (0..j).map(|i| (x + i as f64) / j as f64).collect()
}

/// Gaussian tail Q(x) = ½·erfc(x/√2).
pub fn gaussian_q(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

//! First hop: Rayleigh fading with partial relay selection on outdated CSI.
//!
//! The source picks the m-th worst of M relays from feedback that is
//! correlated (coefficient ρ_m) with the channel at transmission time. The
//! selected SNR γ₁ is a finite mixture of exponentials:
//!   F̄(γ) = Σ_k A_k·exp(−λ_k γ/μ₁),
//!   A_k = m·C(M,m)·C(m−1,k)·(−1)^k/(M−m+k+1),
//!   λ_k = (M−m+k+1)/[(M−m+k)(1−ρ_m)+1].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::gamma::ln_binomial;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfHopParams {
    /// Average SNR per relay link (linear).
    pub mu1: f64,
    /// Number of relays M.
    pub relays: u32,
    /// Selected rank m (1 = worst, M = best).
    pub rank: u32,
    /// Correlation between selection-time and transmission-time CSI.
    pub rho_m: f64,
}

/// One exponential component of the γ₁ mixture: A_k·e^{−λ_k γ/μ₁}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm {
    pub weight: f64,
    pub rate: f64,
}

impl RfHopParams {
    pub fn new(mu1: f64, relays: u32, rank: u32, rho_m: f64) -> Result<Self> {
        let p = RfHopParams { mu1, relays, rank, rho_m };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu1 > 0.0) || !self.mu1.is_finite() {
            return Err(Error::InvalidParameter(format!("mu1 must be > 0, got {}", self.mu1)));
        }
        if self.relays == 0 || self.relays > 64 {
            return Err(Error::InvalidParameter(format!("M must be in 1..=64, got {}", self.relays)));
        }
        if self.rank == 0 || self.rank > self.relays {
            return Err(Error::InvalidParameter(format!(
                "m must satisfy 1 ≤ m ≤ M = {}, got {}",
                self.relays, self.rank
            )));
        }
        if !(0.0..=1.0).contains(&self.rho_m) {
            return Err(Error::InvalidParameter(format!("rho_m must be in [0,1], got {}", self.rho_m)));
        }
        Ok(())
    }

    pub fn with_mu1(&self, mu1: f64) -> Self {
        RfHopParams { mu1, ..*self }
    }

    /// The mixture components (A_k, λ_k); Σ A_k = 1.
    pub fn terms(&self) -> Vec<ExpTerm> {
        let (big_m, m) = (self.relays, self.rank);
        let lead = (m as f64).ln() + ln_binomial(big_m, m);
        (0..m)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let e = (big_m - m + k + 1) as f64;
                let d = (big_m - m + k) as f64 * (1.0 - self.rho_m) + 1.0;
                ExpTerm {
                    weight: sign * (lead + ln_binomial(m - 1, k)).exp() / e,
                    rate: e / d,
                }
            })
            .collect()
    }
}

/// Density of γ₁(m).
pub fn pdf_gamma1(p: &RfHopParams, gamma: f64) -> f64 {
    if gamma < 0.0 {
        return 0.0;
    }
    let v: f64 = p
        .terms()
        .iter()
        .map(|t| t.weight * t.rate / p.mu1 * (-t.rate * gamma / p.mu1).exp())
        .sum();
    v.max(0.0)
}

/// CDF of γ₁(m): Σ A_k(1 − e^{−λ_k γ/μ₁}) in the lower half (small-γ
/// precision), 1 − F̄ in the upper half.
pub fn cdf_gamma1(p: &RfHopParams, gamma: f64) -> f64 {
    if gamma <= 0.0 {
        return 0.0;
    }
    let terms = p.terms();
    let upper: f64 = terms.iter().map(|t| t.weight * (-t.rate * gamma / p.mu1).exp()).sum();
    if upper < 0.5 {
        return (1.0 - upper).clamp(0.0, 1.0);
    }
    let v: f64 = terms.iter().map(|t| -t.weight * (-t.rate * gamma / p.mu1).exp_m1()).sum();
    v.clamp(0.0, 1.0)
}

/// 1 − F(γ).
pub fn ccdf_gamma1(p: &RfHopParams, gamma: f64) -> f64 {
    if gamma <= 0.0 {
        return 1.0;
    }
    let v: f64 = p
        .terms()
        .iter()
        .map(|t| t.weight * (-t.rate * gamma / p.mu1).exp())
        .sum();
    v.clamp(0.0, 1.0)
}

/// E[γ₁(m)] = Σ A_k μ₁/λ_k.
pub fn mean_gamma1(p: &RfHopParams) -> f64 {
    p.terms().iter().map(|t| t.weight * p.mu1 / t.rate).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_relay_is_exponential() {
        let p = RfHopParams::new(2.0, 1, 1, 0.3).unwrap();
        assert!((pdf_gamma1(&p, 1.0) - 0.5 * (-0.5f64).exp()).abs() < 1e-15);
        assert!((cdf_gamma1(&p, 2.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert!((mean_gamma1(&p) - 2.0).abs() < 1e-14);
        assert_eq!(cdf_gamma1(&p, 0.0), 0.0);
    }

    #[test]
    fn best_of_three_perfect_csi() {
        let p = RfHopParams::new(5.0, 3, 3, 1.0).unwrap();
        assert!((mean_gamma1(&p) / 5.0 - 11.0 / 6.0).abs() < 1e-13);
        for &g in &[0.1, 1.0, 5.0, 20.0] {
            let exact = (1.0 - (-g / 5.0f64).exp()).powi(3);
            assert!((cdf_gamma1(&p, g) - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn weights_sum_to_one() {
        for (big_m, m) in [(3, 1), (3, 2), (3, 3), (8, 5), (64, 3)] {
            let p = RfHopParams::new(1.0, big_m, m, 0.7).unwrap();
            let s: f64 = p.terms().iter().map(|t| t.weight).sum();
            assert!((s - 1.0).abs() < 1e-9, "M={big_m} m={m}: {s}");
        }
    }

    #[test]
    fn rejects_bad_rank() {
        assert!(RfHopParams::new(1.0, 3, 4, 0.5).is_err());
        assert!(RfHopParams::new(1.0, 3, 0, 0.5).is_err());
        assert!(RfHopParams::new(-1.0, 3, 1, 0.5).is_err());
        assert!(RfHopParams::new(1.0, 3, 1, 1.5).is_err());
    }
}

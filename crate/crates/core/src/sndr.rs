//! End-to-end SNDR of the two-hop link.
//!
//! Fixed-gain AF with impaired transceivers, after absorbing G into C:
//!   γ = γ₁γ₂ / (δγ₁γ₂ + (1+κ₂²)γ₂ + C)            aggregate κ model
//!   γ = γ₁γ₂ / (κγ₂ + C)                           relay HPA
//! DF takes the weaker hop, each hop capped by its own distortion:
//!   γ = min(γ₁/(κ₁²γ₁+1), γ₂/(κ₂²γ₂+1)).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardware::{aggregate_delta, HardwareProfile, LinkConstants};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Protocol {
    Af,
    Df,
}

impl std::str::FromStr for Protocol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "af" => Ok(Protocol::Af),
            "df" => Ok(Protocol::Df),
            _ => Err(Error::InvalidParameter(format!("unknown protocol '{s}' (expected AF or DF)"))),
        }
    }
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Protocol::Af => "AF",
            Protocol::Df => "DF",
        })
    }
}

/// Pre-resolved combiner for the sampling hot loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Combiner {
    Af { delta: f64, b: f64, c: f64 },
    Df { k1: f64, k2: f64 },
}

impl Combiner {
    pub fn new(protocol: Protocol, hw: &HardwareProfile, lc: &LinkConstants) -> Result<Self> {
        match (protocol, hw) {
            (Protocol::Af, HardwareProfile::Ideal) => Ok(Combiner::Af { delta: 0.0, b: 1.0, c: lc.c }),
            (Protocol::Af, HardwareProfile::Aggregate { kappa1, kappa2 }) => Ok(Combiner::Af {
                delta: aggregate_delta(*kappa1, *kappa2),
                b: 1.0 + kappa2 * kappa2,
                c: lc.c,
            }),
            (Protocol::Af, HardwareProfile::Hpa(_)) => Ok(Combiner::Af { delta: 0.0, b: lc.kappa, c: lc.c }),
            (Protocol::Df, HardwareProfile::Ideal) => Ok(Combiner::Df { k1: 0.0, k2: 0.0 }),
            (Protocol::Df, HardwareProfile::Aggregate { kappa1, kappa2 }) => {
                Ok(Combiner::Df { k1: kappa1 * kappa1, k2: kappa2 * kappa2 })
            }
            (Protocol::Df, HardwareProfile::Hpa(_)) => Err(Error::UnsupportedCombination(
                "the nonlinear HPA model is defined for AF relaying only".into(),
            )),
        }
    }

    #[inline]
    pub fn apply(&self, g1: f64, g2: f64) -> f64 {
        match *self {
            Combiner::Af { delta, b, c } => {
                let num = g1 * g2;
                if num == 0.0 {
                    return 0.0;
                }
                num / (delta * num + b * g2 + c)
            }
            Combiner::Df { k1, k2 } => (g1 / (k1 * g1 + 1.0)).min(g2 / (k2 * g2 + 1.0)),
        }
    }
}

pub fn combine(protocol: Protocol, hw: &HardwareProfile, lc: &LinkConstants, gamma1: f64, gamma2: f64) -> Result<f64> {
    if !(gamma1 >= 0.0 && gamma2 >= 0.0) {
        return Err(Error::Domain(format!("SNRs must be ≥ 0, got ({gamma1}, {gamma2})")));
    }
    Ok(Combiner::new(protocol, hw, lc)?.apply(gamma1, gamma2))
}

/// Supremum of the SNDR as both hop SNRs grow: 1/δ (AF), 1/max κᵢ² (DF),
/// +∞ for ideal hardware. The relay-HPA SNDR has no hard bound (γ₁/κ is
/// unbounded); its capacity ceiling lives in [`crate::hardware::HpaParams`].
pub fn ceiling(protocol: Protocol, hw: &HardwareProfile) -> f64 {
    match (protocol, hw) {
        (Protocol::Af, HardwareProfile::Aggregate { kappa1, kappa2 }) => 1.0 / aggregate_delta(*kappa1, *kappa2),
        (Protocol::Df, HardwareProfile::Aggregate { kappa1, kappa2 }) => {
            1.0 / (kappa1 * kappa1).max(kappa2 * kappa2)
        }
        _ => f64::INFINITY,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lc(c: f64) -> LinkConstants {
        LinkConstants { c, egamma1: c - 1.0, kappa: 1.0 }
    }

    #[test]
    fn worked_examples() {
        let ideal = HardwareProfile::Ideal;
        let agg = HardwareProfile::aggregate(0.3, 0.3).unwrap();
        assert!((combine(Protocol::Af, &ideal, &lc(5.0), 10.0, 20.0).unwrap() - 8.0).abs() < 1e-14);
        let v = combine(Protocol::Af, &agg, &lc(5.0), 10.0, 20.0).unwrap();
        assert!((v - 200.0 / 64.42).abs() < 1e-12, "{v}");
        let v = combine(Protocol::Df, &agg, &lc(5.0), 10.0, 20.0).unwrap();
        assert!((v - (10.0f64 / 1.9).min(20.0 / 2.8)).abs() < 1e-14);
        assert!((v - 5.2632).abs() < 1e-4);
    }

    #[test]
    fn zero_impairment_reduces_to_ideal() {
        let zero = HardwareProfile::aggregate(0.0, 0.0).unwrap();
        for p in [Protocol::Af, Protocol::Df] {
            for (a, b) in [(1.0, 2.0), (30.0, 0.5), (0.0, 4.0)] {
                assert_eq!(
                    combine(p, &zero, &lc(3.0), a, b).unwrap(),
                    combine(p, &HardwareProfile::Ideal, &lc(3.0), a, b).unwrap()
                );
            }
        }
    }

    #[test]
    fn ceilings() {
        let agg = HardwareProfile::aggregate(0.3, 0.3).unwrap();
        assert!((ceiling(Protocol::Af, &agg) - 1.0 / 0.1881).abs() < 1e-12);
        assert!((ceiling(Protocol::Df, &agg) - 1.0 / 0.09).abs() < 1e-12);
        assert_eq!(ceiling(Protocol::Af, &HardwareProfile::Ideal), f64::INFINITY);
        let v = combine(Protocol::Af, &agg, &lc(1e9), 1e9, 1e9).unwrap();
        assert!((v / ceiling(Protocol::Af, &agg) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn df_hpa_is_unsupported() {
        let h = HardwareProfile::hpa(crate::hardware::HpaKind::Sel, 3.0).unwrap();
        assert!(matches!(
            combine(Protocol::Df, &h, &lc(2.0), 1.0, 1.0),
            Err(Error::UnsupportedCombination(_))
        ));
    }
}

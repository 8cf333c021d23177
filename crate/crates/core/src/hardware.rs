//! Transceiver impairments: the aggregate κ model and the Bussgang-linearised
//! power amplifier (soft envelope limiter or Saleh TWT), plus the fixed relay
//! gain constant C that absorbs the gain G.
//!
//! HPA quantities live in the normalised-SNR domain: the amplifier input is a
//! unit-power complex Gaussian, so IBO = A_sat² and the distortion term of
//! κ = 1 + σ_τ²/(ε²G²σ₀²) reduces, with the fixed gain G² = P_r/(P_sE|h|²+σ₀²),
//! to (σ_τ²/ε²)(E[γ₁]+1).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{integrate_to_inf, Quad};
use crate::rf_channel::{mean_gamma1, RfHopParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum HpaKind {
    Sel,
    Twta,
}

impl std::str::FromStr for HpaKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sel" => Ok(HpaKind::Sel),
            "twta" => Ok(HpaKind::Twta),
            _ => Err(Error::InvalidParameter(format!("unknown HPA kind '{s}' (expected SEL or TWTA)"))),
        }
    }
}

/// Bussgang decomposition y = εx + τ of the amplifier for unit input power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HpaParams {
    pub kind: HpaKind,
    pub ibo_db: f64,
    /// |ε|, the linear gain.
    pub epsilon: f64,
    /// Distortion power σ_τ² = ι − ε².
    pub sigma_tau2: f64,
    /// Output power E|y|² (the clipping factor of the capacity ceiling).
    pub iota: f64,
    /// κ at unit gain normalisation, 1 + σ_τ²/ε².
    pub kappa: f64,
}

impl HpaParams {
    /// κ under the fixed relay gain for a first hop with mean SNR `egamma1`.
    pub fn kappa_at(&self, egamma1: f64) -> f64 {
        1.0 + self.sigma_tau2 / (self.epsilon * self.epsilon) * (egamma1 + 1.0)
    }

    /// C̄_c = log₂(1 + ϖε²/(ι − ε²)).
    pub fn capacity_ceiling(&self, varpi: f64) -> f64 {
        (varpi * self.epsilon * self.epsilon / self.sigma_tau2).ln_1p() / std::f64::consts::LN_2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "variant")]
pub enum HardwareProfile {
    Ideal,
    Aggregate { kappa1: f64, kappa2: f64 },
    Hpa(HpaParams),
}

impl HardwareProfile {
    pub fn aggregate(kappa1: f64, kappa2: f64) -> Result<Self> {
        for k in [kappa1, kappa2] {
            if !(k >= 0.0) || !k.is_finite() {
                return Err(Error::InvalidParameter(format!("impairment levels must be ≥ 0, got {k}")));
            }
        }
        Ok(HardwareProfile::Aggregate { kappa1, kappa2 })
    }

    pub fn hpa(kind: HpaKind, ibo_db: f64) -> Result<Self> {
        Ok(HardwareProfile::Hpa(hpa_params(kind, ibo_db)?))
    }

    pub fn is_ideal(&self) -> bool {
        match self {
            HardwareProfile::Ideal => true,
            HardwareProfile::Aggregate { kappa1, kappa2 } => *kappa1 == 0.0 && *kappa2 == 0.0,
            HardwareProfile::Hpa(_) => false,
        }
    }

    /// (κ₁, κ₂); zero for the ideal and HPA profiles.
    pub fn kappas(&self) -> (f64, f64) {
        match *self {
            HardwareProfile::Aggregate { kappa1, kappa2 } => (kappa1, kappa2),
            _ => (0.0, 0.0),
        }
    }
}

/// δ = κ₁² + κ₂² + κ₁²κ₂².
pub fn aggregate_delta(kappa1: f64, kappa2: f64) -> f64 {
    let (a, b) = (kappa1 * kappa1, kappa2 * kappa2);
    a + b + a * b
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkConstants {
    pub c: f64,
    pub egamma1: f64,
    /// The HPA κ (1 for the other profiles).
    pub kappa: f64,
}

pub fn link_constant(p: &RfHopParams, hw: &HardwareProfile) -> LinkConstants {
    let e = mean_gamma1(p);
    match hw {
        HardwareProfile::Ideal => LinkConstants { c: e + 1.0, egamma1: e, kappa: 1.0 },
        HardwareProfile::Aggregate { kappa1, .. } => {
            LinkConstants { c: e * (1.0 + kappa1 * kappa1) + 1.0, egamma1: e, kappa: 1.0 }
        }
        HardwareProfile::Hpa(h) => {
            let kappa = h.kappa_at(e);
            LinkConstants { c: e + kappa, egamma1: e, kappa }
        }
    }
}

/// Bussgang parameters of an amplifier driven by unit-power complex Gaussian
/// input at the given input back-off.
pub fn hpa_params(kind: HpaKind, ibo_db: f64) -> Result<HpaParams> {
    if !ibo_db.is_finite() {
        return Err(Error::InvalidParameter(format!("IBO must be finite, got {ibo_db}")));
    }
    let nu2 = 10f64.powf(ibo_db / 10.0);
    let (epsilon, iota) = match kind {
        HpaKind::Sel => {
            let nu = nu2.sqrt();
            let clip = (-nu2).exp();
            let eps = 1.0 - clip + 0.5 * PI.sqrt() * nu * libm::erfc(nu);
            (eps, -(-nu2).exp_m1())
        }
        HpaKind::Twta => twta_moments(nu2)?,
    };
    // ι − ε² is a difference of nearby numbers at large IBO; floor at 0
    let sigma_tau2 = (iota - epsilon * epsilon).max(0.0);
    let kappa = 1.0 + sigma_tau2 / (epsilon * epsilon);
    Ok(HpaParams { kind, ibo_db, epsilon, sigma_tau2, iota, kappa })
}

/// Saleh TWT: A(ρ) = A²ρ/(ρ² + A²), Φ(ρ) = (π/3)ρ²/(ρ² + A²), with ρ² ~ Exp(1).
fn twta_moments(a2: f64) -> Result<(f64, f64)> {
    let q = Quad::new(1e-14, 1e-12);
    let gain = |u: f64| {
        let amp = a2 * u.sqrt() / (u + a2);
        let phase = PI / 3.0 * u / (u + a2);
        (amp, phase)
    };
    // ε = E[ρ·A(ρ)e^{jΦ}] over u = ρ²
    let re = integrate_to_inf(|u| {
        let (amp, ph) = gain(u);
        u.sqrt() * amp * ph.cos() * (-u).exp()
    }, 0.0, 1.0, &q)
    .require("TWTA gain (real part)")?;
    let im = integrate_to_inf(|u| {
        let (amp, ph) = gain(u);
        u.sqrt() * amp * ph.sin() * (-u).exp()
    }, 0.0, 1.0, &q)
    .require("TWTA gain (imaginary part)")?;
    let iota = integrate_to_inf(|u| {
        let (amp, _) = gain(u);
        amp * amp * (-u).exp()
    }, 0.0, 1.0, &q)
    .require("TWTA output power")?;
    Ok((Complex64::new(re, im).norm(), iota))
}

//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Three operations on one [`Scenario`]: an outage curve with its
//! high-SNR asymptote, the capacity at one SNR next to its bound and
//! ceiling, and a Monte-Carlo check of both at one SNR.

use wasm_bindgen::prelude::*;

use rfso_core::analytics::{self as an, LinkConfig};
use rfso_core::fso_channel::{DetectionParams, FsoHop, MalagaParams, PointingPathParams};
use rfso_core::hardware::HardwareProfile;
use rfso_core::montecarlo::{estimate_many, Metric, Probe, SimConfig};
use rfso_core::rf_channel::RfHopParams;
use rfso_core::sndr::Protocol;
use rfso_core::{db_to_linear, Result};

/// Reference link with the knobs the page exposes.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Scenario {
    link: LinkConfig,
    gamma_th: f64,
}

#[wasm_bindgen]
impl Scenario {
    /// `protocol` "AF"/"DF"; `hardware` "ideal", "aggregate" (κ₁ = κ₂ =
    /// `kappa`) or "sel"/"twta" (amplifier at `ibo_db`); `r` 1 heterodyne,
    /// 2 IM/DD.
    #[wasm_bindgen(constructor)]
    pub fn new(
        protocol: &str,
        hardware: &str,
        kappa: f64,
        ibo_db: f64,
        r: u32,
        xi: f64,
        gamma_th_db: f64,
    ) -> std::result::Result<Scenario, JsError> {
        Scenario::build(protocol, hardware, kappa, ibo_db, r, xi, gamma_th_db).map_err(|e| JsError::new(&e.to_string()))
    }

    /// Flattened `[snr_db, op, op_asymptote]` rows; failed cells are NaN.
    pub fn outage_curve(&self, start_db: f64, stop_db: f64, step_db: f64) -> Vec<f64> {
        self.outage_rows(start_db, stop_db, step_db).into_iter().flatten().collect()
    }

    /// `[ec, upper bound, ceiling]` in bps/Hz at μ₁ = μ_r = `snr_db`;
    /// NaN where undefined, ∞ for an unbounded ceiling.
    pub fn capacity(&self, snr_db: f64) -> Vec<f64> {
        self.capacity_row(snr_db).to_vec()
    }

    /// `[mc_op, stderr, analytic_op, mc_ec, stderr, analytic_ec]`.
    pub fn simulate(&self, snr_db: f64, samples: u32, seed: u32) -> std::result::Result<Vec<f64>, JsError> {
        self.simulate_row(snr_db, samples as u64, seed as u64).map(|r| r.to_vec()).map_err(|e| JsError::new(&e.to_string()))
    }

    pub fn sndr_ceiling(&self) -> f64 {
        self.link.sndr_ceiling()
    }
}

impl Scenario {
    pub fn build(
        protocol: &str,
        hardware: &str,
        kappa: f64,
        ibo_db: f64,
        r: u32,
        xi: f64,
        gamma_th_db: f64,
    ) -> Result<Scenario> {
        let hw = match hardware.to_ascii_lowercase().as_str() {
            "ideal" => HardwareProfile::Ideal,
            "aggregate" => HardwareProfile::aggregate(kappa, kappa)?,
            kind => HardwareProfile::hpa(kind.parse()?, ibo_db)?,
        };
        let rf = RfHopParams::new(1.0, 3, 3, 0.7)?;
        let pp = PointingPathParams { xi, a0: 1.0, sigma_atten: 0.0, l_km: 1.0 };
        let fso = FsoHop::new(&MalagaParams::reference(), pp, DetectionParams { r, mu_r: 1.0 })?;
        let link = LinkConfig::new(rf, fso, hw, protocol.parse::<Protocol>()?)?;
        Ok(Scenario { link, gamma_th: db_to_linear(gamma_th_db) })
    }

    fn at(&self, snr_db: f64) -> LinkConfig {
        self.link.with_snr_db(snr_db)
    }

    fn ec(&self, l: &LinkConfig) -> Result<f64> {
        match l.hw {
            HardwareProfile::Hpa(_) => an::ec_hpa_closed(l).map(|v| v.value),
            _ => an::ec_numeric(l),
        }
    }

    pub fn outage_rows(&self, start_db: f64, stop_db: f64, step_db: f64) -> Vec<[f64; 3]> {
        if !(step_db > 0.0) || !(stop_db >= start_db) {
            return Vec::new();
        }
        let n = ((stop_db - start_db) / step_db + 1e-9).floor() as usize;
        (0..=n.min(400))
            .map(|i| {
                let db = start_db + i as f64 * step_db;
                let l = self.at(db);
                let asym = match l.protocol {
                    Protocol::Af => an::outage_af_asymptotic(&l, self.gamma_th),
                    Protocol::Df => an::outage_df_asymptotic(&l, self.gamma_th),
                };
                [db, an::sndr_cdf(&l, self.gamma_th).unwrap_or(f64::NAN), asym.unwrap_or(f64::NAN)]
            })
            .collect()
    }

    pub fn capacity_row(&self, snr_db: f64) -> [f64; 3] {
        let l = self.at(snr_db);
        let ceiling = an::ceilings(&l).ceiling_capacity;
        let bound = match (l.protocol, l.hw) {
            (_, HardwareProfile::Hpa(_)) => Ok(ceiling),
            (Protocol::Af, _) => an::ec_upper_bound_af(&l),
            (Protocol::Df, _) => an::ec_df_bound(&l),
        };
        [self.ec(&l).unwrap_or(f64::NAN), bound.unwrap_or(f64::NAN), ceiling]
    }

    pub fn simulate_row(&self, snr_db: f64, samples: u64, seed: u64) -> Result<[f64; 6]> {
        let l = self.at(snr_db);
        let probes = [
            Probe { cfg: l.clone(), metric: Metric::Op { gamma_th: self.gamma_th } },
            Probe { cfg: l.clone(), metric: Metric::Ec { varpi: l.varpi } },
        ];
        let est = estimate_many(&probes, &SimConfig::new(seed, samples.max(1)))?;
        let op = an::sndr_cdf(&l, self.gamma_th)?;
        let ec = self.ec(&l)?;
        Ok([est[0].value, est[0].stderr, op, est[1].value, est[1].stderr, ec])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_rows_and_asymptote() {
        let s = Scenario::build("DF", "ideal", 0.0, 0.0, 2, 0.7, 7.0).unwrap();
        let rows = s.outage_rows(0.0, 60.0, 10.0);
        assert_eq!(rows.len(), 7);
        assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));
        let last = rows[6];
        assert!((last[2] / last[1] - 1.0).abs() < 0.05, "{last:?}");
        assert!(s.outage_rows(0.0, 10.0, 0.0).is_empty());
    }

    #[test]
    fn capacity_sits_below_bound_and_ceiling() {
        let s = Scenario::build("AF", "aggregate", 0.3, 0.0, 2, 0.7, 7.0).unwrap();
        let [ec, bound, ceiling] = s.capacity_row(30.0);
        assert!(ec <= bound && bound <= ceiling, "{ec} {bound} {ceiling}");
        let hpa = Scenario::build("AF", "sel", 0.0, 5.0, 2, 0.7, 7.0).unwrap();
        let [ec, _, ceiling] = hpa.capacity_row(40.0);
        assert!(ec < ceiling);
    }

    #[test]
    fn simulation_agrees_with_analysis() {
        let s = Scenario::build("AF", "aggregate", 0.3, 0.0, 2, 0.7, 7.0).unwrap();
        let [op, se, a, ec, se_ec, b] = s.simulate_row(10.0, 200_000, 3).unwrap();
        assert!((op - a).abs() <= 4.0 * se, "{op} ± {se} vs {a}");
        assert!((ec - b).abs() <= 4.0 * se_ec, "{ec} ± {se_ec} vs {b}");
    }

    #[test]
    fn bad_inputs_are_errors() {
        assert!(Scenario::build("DF", "sel", 0.0, 5.0, 2, 0.7, 7.0).is_err());
        assert!(Scenario::build("XF", "ideal", 0.0, 0.0, 2, 0.7, 7.0).is_err());
        assert!(Scenario::build("AF", "aggregate", -1.0, 0.0, 2, 0.7, 7.0).is_err());
        assert!(Scenario::build("AF", "ideal", 0.0, 0.0, 3, 0.7, 7.0).is_err());
    }
}

//! Curve evaluation: one column per (method, metric), plus Monte-Carlo
//! standard errors and the closed-form fallback flags.

use serde::Serialize;

use rfso_core::analytics::{self as an, LinkConfig};
use rfso_core::hardware::HardwareProfile;
use rfso_core::montecarlo::{estimate_many, Metric, MetricEstimate, Probe, SimConfig, Tolerances};
use rfso_core::sndr::Protocol;
use rfso_core::{db_to_linear, Result as CoreResult};

use crate::config::{CliError, McSpec, Method, MetricKind, Params, RunConfig};

/// One labelled curve family of a run (a figure has several).
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub cfg: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    #[serde(skip)]
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PointMeta {
    pub x: f64,
    /// Closed-form capacity replaced by quadrature at this point.
    pub ec_fallback: bool,
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Derived {
    pub varpi: f64,
    /// None when the SNDR is unbounded.
    pub sndr_ceiling: Option<f64>,
    pub capacity_ceiling: Option<f64>,
    pub diversity_gain: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesResult {
    pub label: String,
    pub config: RunConfig,
    pub derived: Derived,
    pub columns: Vec<Column>,
    pub points: Vec<PointMeta>,
    /// Requested columns that are undefined for this model, and why.
    pub undefined: Vec<String>,
}

impl SeriesResult {
    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }
}

fn gamma_th(p: &Params) -> f64 {
    db_to_linear(p.gamma_th_db)
}

fn analytic(link: &LinkConfig, p: &Params, metric: MetricKind, meta: &mut PointMeta) -> CoreResult<Option<f64>> {
    Ok(Some(match metric {
        MetricKind::Op => an::sndr_cdf(link, gamma_th(p))?,
        MetricKind::Sep => {
            if link.protocol == Protocol::Af && link.hw.is_ideal() {
                an::sep_af_ideal_closed(link, p.modulation_c)?
            } else {
                an::sep_numeric(link, p.modulation_c)?
            }
        }
        MetricKind::Ec => match link.hw {
            HardwareProfile::Hpa(_) => {
                let v = an::ec_hpa_closed(link)?;
                meta.ec_fallback = v.fallback;
                v.value
            }
            _ => an::ec_numeric(link)?,
        },
    }))
}

fn capacity_ceiling(link: &LinkConfig) -> Option<f64> {
    let c = an::ceilings(link).ceiling_capacity;
    c.is_finite().then_some(c)
}

fn asymptotic(link: &LinkConfig, p: &Params, metric: MetricKind) -> CoreResult<Option<f64>> {
    let af = link.protocol == Protocol::Af;
    Ok(match metric {
        MetricKind::Op if af => Some(an::outage_af_asymptotic(link, gamma_th(p))?),
        MetricKind::Op => Some(an::outage_df_asymptotic(link, gamma_th(p))?),
        MetricKind::Sep if !link.hw.is_ideal() => None,
        MetricKind::Sep if af => Some(an::sep_af_ideal_asymptotic(link, p.modulation_c)?),
        MetricKind::Sep => {
            if p.mu1_db != p.mur_db || p.include_path_loss {
                None
            } else {
                Some(an::sep_df_high_snr(link, p.modulation_c)?.sep(link.rf.mu1))
            }
        }
        MetricKind::Ec => match link.hw {
            HardwareProfile::Hpa(_) => Some(an::ec_hpa_asymptotic(link)?),
            _ if af => Some(an::ec_approx(link)?),
            _ => capacity_ceiling(link),
        },
    })
}

fn bound(link: &LinkConfig, metric: MetricKind) -> CoreResult<Option<f64>> {
    if metric != MetricKind::Ec {
        return Ok(None);
    }
    Ok(match (link.protocol, link.hw) {
        (_, HardwareProfile::Hpa(_)) => capacity_ceiling(link),
        (Protocol::Af, _) => Some(an::ec_upper_bound_af(link)?),
        (Protocol::Df, _) => Some(an::ec_df_bound(link)?),
    })
}

/// Why a requested column has no values for this model.
fn undefined_reason(cfg: &RunConfig, method: Method, metric: MetricKind) -> Option<&'static str> {
    let p = &cfg.params;
    let ideal = p.hardware == "ideal" || (p.hardware == "aggregate" && p.kappa1 == 0.0 && p.kappa2 == 0.0);
    match (method, metric) {
        (Method::Bounds, MetricKind::Op | MetricKind::Sep) => Some("bounds are defined for the capacity only"),
        (Method::Asymptotic, MetricKind::Sep) if !ideal => {
            Some("impaired hardware floors the SEP; there is no high-SNR slope to follow")
        }
        (Method::Asymptotic, MetricKind::Sep) if p.protocol == "DF" && (p.mu1_db != p.mur_db || p.include_path_loss) => {
            Some("the DF high-SNR SEP is stated for equal hop SNRs")
        }
        (Method::Asymptotic | Method::Bounds, MetricKind::Ec) if p.protocol == "DF" && ideal => {
            Some("ideal DF capacity has no finite ceiling")
        }
        _ => None,
    }
}

pub fn sim_config(mc: &McSpec) -> SimConfig {
    SimConfig::new(mc.seed, mc.samples).with_batch_size(mc.batch_size).with_workers(mc.workers as usize)
}

fn mc_metric(link: &LinkConfig, p: &Params, metric: MetricKind) -> Metric {
    match metric {
        MetricKind::Op => Metric::Op { gamma_th: gamma_th(p) },
        MetricKind::Sep => Metric::Sep { c: p.modulation_c },
        MetricKind::Ec => Metric::Ec { varpi: link.varpi },
    }
}

/// Evaluate every requested column over the grid.
pub fn evaluate(label: &str, cfg: &RunConfig) -> Result<SeriesResult, CliError> {
    let grid = cfg.sweep.grid();
    let params: Vec<Params> = grid.iter().map(|&x| cfg.at(x)).collect();
    let links: Vec<LinkConfig> = params.iter().map(Params::link).collect::<Result<_, _>>()?;
    let mut points: Vec<PointMeta> = grid.iter().map(|&x| PointMeta { x, ..Default::default() }).collect();
    let metrics = &cfg.sweep.metrics;
    let mut columns = Vec::new();
    let mut undefined = Vec::new();

    for &method in &cfg.sweep.methods {
        if method == Method::Mc {
            let probes: Vec<Probe> = links
                .iter()
                .zip(&params)
                .flat_map(|(l, p)| metrics.iter().map(move |&m| Probe { cfg: l.clone(), metric: mc_metric(l, p, m) }))
                .collect();
            let est: Vec<MetricEstimate> = estimate_many(&probes, &sim_config(&cfg.mc))?;
            for (i, e) in est.iter().enumerate() {
                if let Some(w) = &e.warning {
                    points[i / metrics.len()].warnings.push(format!("mc_{}: {w}", metrics[i % metrics.len()].name()));
                }
            }
            for (j, m) in metrics.iter().enumerate() {
                columns.push(Column {
                    name: format!("mc_{}", m.name()),
                    values: (0..grid.len()).map(|i| Some(est[i * metrics.len() + j].value)).collect(),
                });
            }
            for (j, m) in metrics.iter().enumerate() {
                columns.push(Column {
                    name: format!("mc_stderr_{}", m.name()),
                    values: (0..grid.len()).map(|i| Some(est[i * metrics.len() + j].stderr)).collect(),
                });
            }
            continue;
        }
        for &metric in metrics {
            let name = format!("{}_{}", method.name(), metric.name());
            if let Some(why) = undefined_reason(cfg, method, metric) {
                undefined.push(format!("{name}: {why}"));
            }
            let mut values = Vec::with_capacity(grid.len());
            for ((link, p), meta) in links.iter().zip(&params).zip(points.iter_mut()) {
                let v = match method {
                    Method::Analytic => analytic(link, p, metric, meta),
                    Method::Asymptotic => asymptotic(link, p, metric),
                    _ => bound(link, metric),
                };
                values.push(match v {
                    Ok(v) => v,
                    Err(e) => {
                        meta.errors.push(format!("{name}: {e}"));
                        None
                    }
                });
            }
            columns.push(Column { name, values });
        }
    }
    // mc_stderr columns go after every value column
    let (mut vals, errs): (Vec<Column>, Vec<Column>) =
        columns.into_iter().partition(|c| !c.name.starts_with("mc_stderr_"));
    vals.extend(errs);
    if cfg.sweep.methods.contains(&Method::Analytic)
        && metrics.contains(&MetricKind::Ec)
        && cfg.params.hardware == "hpa"
    {
        vals.push(Column {
            name: "analytic_ec_fallback".into(),
            values: points.iter().map(|p| Some(p.ec_fallback as u8 as f64)).collect(),
        });
    }

    let base = cfg.params.link()?;
    let asym = an::ceilings(&base);
    let derived = Derived {
        varpi: base.varpi,
        sndr_ceiling: asym.ceiling_sndr.is_finite().then_some(asym.ceiling_sndr),
        capacity_ceiling: capacity_ceiling(&base),
        diversity_gain: asym.diversity_gain,
    };
    Ok(SeriesResult { label: label.to_string(), config: cfg.clone(), derived, columns: vals, points, undefined })
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Validation {
    pub checked: usize,
    /// OP below the floor, where 3σ says little.
    pub skipped: usize,
    pub max_z: f64,
    pub breaches: Vec<String>,
}

impl Validation {
    pub fn passed(&self) -> bool {
        self.breaches.is_empty()
    }
}

/// |analytic − mc| ≤ z_max·stderr at every point where both exist.
pub fn validate(results: &[SeriesResult], tol: &Tolerances) -> Validation {
    let mut v = Validation::default();
    for r in results {
        for m in &r.config.sweep.metrics {
            let (Some(a), Some(s), Some(e)) = (
                r.column(&format!("analytic_{}", m.name())),
                r.column(&format!("mc_{}", m.name())),
                r.column(&format!("mc_stderr_{}", m.name())),
            ) else {
                continue;
            };
            for (i, p) in r.points.iter().enumerate() {
                let (Some(a), Some(s), Some(e)) = (a.values[i], s.values[i], e.values[i]) else { continue };
                if *m == MetricKind::Op && a < tol.op_floor {
                    v.skipped += 1;
                    continue;
                }
                v.checked += 1;
                let d = (a - s).abs();
                let ok = if e > 0.0 {
                    let z = d / e;
                    v.max_z = v.max_z.max(z);
                    z <= tol.z_max
                } else {
                    d <= 1e-9
                };
                if !ok {
                    let tag = if r.label.is_empty() { String::new() } else { format!("{}:", r.label) };
                    v.breaches.push(format!(
                        "{tag}{} at x = {}: analytic {a:.6e}, mc {s:.6e} ± {e:.2e}",
                        m.name(),
                        p.x
                    ));
                }
            }
        }
    }
    v
}

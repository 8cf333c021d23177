//! The run-configuration format: `key = value` lines grouped under optional
//! `[section]` headers, `#` comments. Every key has a default (the reference link
//! values where they exist), so an empty file is a valid config.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use rfso_core::fso_channel::{DetectionParams, FsoHop, MalagaParams, PointingPathParams};
use rfso_core::hardware::{HardwareProfile, HpaKind};
use rfso_core::rf_channel::RfHopParams;
use rfso_core::analytics::LinkConfig;
use rfso_core::sndr::Protocol;
use rfso_core::{db_to_linear, Error};

/// Everything that can stop a run, tagged with its exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Parse { line: usize, col: usize, msg: String },
    /// Bad value outside the file (a command-line flag, a preset).
    Config(String),
    Unsupported(String),
    Runtime(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Unsupported(_) => 3,
            _ => 1,
        }
    }

    fn at(pos: Pos, msg: impl Into<String>) -> Self {
        CliError::Parse { line: pos.line, col: pos.col, msg: msg.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse { line, col, msg } => write!(f, "{line}:{col}: {msg}"),
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Unsupported(m) => write!(f, "unsupported combination: {m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::UnsupportedCombination(m) => CliError::Unsupported(m),
            Error::InvalidParameter(m) => CliError::Config(m),
            e => CliError::Runtime(e.to_string()),
        }
    }
}

/// 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Real,
    Count,
    Bool,
    Choice(&'static [&'static str]),
    List(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy)]
enum Range {
    Any,
    Positive,
    NonNeg,
    /// (0, 1]
    Fraction,
    /// [0, 1]
    Prob,
}

struct Key {
    name: &'static str,
    section: &'static str,
    kind: Kind,
    range: Range,
    default: &'static str,
    doc: &'static str,
}

const SECTIONS: &[&str] = &["rf", "fso", "link", "sweep", "mc"];

const AXES: &[&str] = &["snr_db", "gamma_th_db", "kappa", "ibo_db", "xi"];
const METRICS: &[&str] = &["op", "sep", "ec"];
const METHODS: &[&str] = &["analytic", "asymptotic", "mc", "bounds"];

#[rustfmt::skip]
const KEYS: &[Key] = &[
    Key { name: "M", section: "rf", kind: Kind::Count, range: Range::Positive, default: "3", doc: "number of relays" },
    Key { name: "m", section: "rf", kind: Kind::Count, range: Range::Positive, default: "3", doc: "rank of the selected relay (m = M picks the best)" },
    Key { name: "rho_m", section: "rf", kind: Kind::Real, range: Range::Prob, default: "0.7", doc: "correlation between outdated and actual CSI, [0, 1]" },

    Key { name: "alpha", section: "fso", kind: Kind::Real, range: Range::Positive, default: "4.2", doc: "Malaga large-scale turbulence parameter" },
    Key { name: "beta", section: "fso", kind: Kind::Count, range: Range::Positive, default: "5", doc: "Malaga small-scale parameter (natural number)" },
    Key { name: "rho", section: "fso", kind: Kind::Real, range: Range::Prob, default: "0.6", doc: "fraction of scatter power coupled to the LOS, [0, 1]" },
    Key { name: "b0", section: "fso", kind: Kind::Real, range: Range::Positive, default: "0.596", doc: "half the average scatter power" },
    Key { name: "Omega", section: "fso", kind: Kind::Real, range: Range::Positive, default: "1.32", doc: "LOS power" },
    Key { name: "dphi", section: "fso", kind: Kind::Real, range: Range::Any, default: "1.5707963267948966", doc: "LOS/coupled-scatter phase difference (rad)" },
    Key { name: "xi", section: "fso", kind: Kind::Real, range: Range::Positive, default: "0.7", doc: "pointing-error coefficient (beam width / jitter)" },
    Key { name: "A0", section: "fso", kind: Kind::Real, range: Range::Fraction, default: "1", doc: "collected power fraction at zero offset, (0, 1]" },
    Key { name: "sigma_atten", section: "fso", kind: Kind::Real, range: Range::NonNeg, default: "0", doc: "weather attenuation coefficient (1/km)" },
    Key { name: "L_km", section: "fso", kind: Kind::Real, range: Range::Positive, default: "1", doc: "link length (km)" },
    Key { name: "r", section: "fso", kind: Kind::Choice(&["1", "2"]), range: Range::Any, default: "2", doc: "detection: 1 heterodyne, 2 IM/DD" },
    Key { name: "detection", section: "fso", kind: Kind::Choice(&["heterodyne", "imdd"]), range: Range::Any, default: "imdd", doc: "same as r, by name" },
    Key { name: "include_path_loss", section: "fso", kind: Kind::Bool, range: Range::Any, default: "false", doc: "scale the optical SNR by exp(-sigma_atten*L_km)^r" },

    Key { name: "protocol", section: "link", kind: Kind::Choice(&["AF", "DF"]), range: Range::Any, default: "AF", doc: "relaying protocol" },
    Key { name: "hardware", section: "link", kind: Kind::Choice(&["ideal", "aggregate", "hpa"]), range: Range::Any, default: "ideal", doc: "transceiver model (hpa is AF-only)" },
    Key { name: "kappa1", section: "link", kind: Kind::Real, range: Range::NonNeg, default: "0.3", doc: "impairment level of the first hop (aggregate)" },
    Key { name: "kappa2", section: "link", kind: Kind::Real, range: Range::NonNeg, default: "0.3", doc: "impairment level of the second hop (aggregate)" },
    Key { name: "hpa_kind", section: "link", kind: Kind::Choice(&["SEL", "TWTA"]), range: Range::Any, default: "SEL", doc: "relay amplifier (hpa)" },
    Key { name: "ibo_db", section: "link", kind: Kind::Real, range: Range::Any, default: "5", doc: "amplifier input back-off, dB (hpa)" },
    Key { name: "gamma_th_db", section: "link", kind: Kind::Real, range: Range::Any, default: "7", doc: "outage threshold, dB" },
    Key { name: "modulation_c", section: "link", kind: Kind::Real, range: Range::Positive, default: "2", doc: "SEP constant c in Q(sqrt(c*SNR)); 2 = CBPSK" },
    Key { name: "varpi", section: "link", kind: Kind::Real, range: Range::Positive, default: "", doc: "capacity scaling; default 1 (r = 1) or e/2pi (r = 2)" },
    Key { name: "snr_db", section: "link", kind: Kind::Real, range: Range::Any, default: "20", doc: "average SNR of both hops when not swept, dB" },
    Key { name: "mu1_db", section: "link", kind: Kind::Real, range: Range::Any, default: "", doc: "average RF SNR, dB (default snr_db)" },
    Key { name: "mur_db", section: "link", kind: Kind::Real, range: Range::Any, default: "", doc: "average optical SNR, dB (default snr_db)" },

    Key { name: "x_axis", section: "sweep", kind: Kind::Choice(AXES), range: Range::Any, default: "snr_db", doc: "swept quantity" },
    Key { name: "start", section: "sweep", kind: Kind::Real, range: Range::Any, default: "0", doc: "first x" },
    Key { name: "stop", section: "sweep", kind: Kind::Real, range: Range::Any, default: "40", doc: "last x (included when on the grid)" },
    Key { name: "step", section: "sweep", kind: Kind::Real, range: Range::Positive, default: "1", doc: "x increment" },
    Key { name: "lock", section: "sweep", kind: Kind::Choice(&["equal", "mu1", "mur", "kappa1", "kappa2"]), range: Range::Any, default: "equal", doc: "snr_db: equal (mu1 = mur = x), mu1 or mur (the other stays at its key); kappa: equal, kappa1 or kappa2" },
    Key { name: "metrics", section: "sweep", kind: Kind::List(METRICS), range: Range::Any, default: "op", doc: "comma list of op, sep, ec" },
    Key { name: "methods", section: "sweep", kind: Kind::List(METHODS), range: Range::Any, default: "analytic", doc: "comma list of analytic, asymptotic, mc, bounds" },

    Key { name: "seed", section: "mc", kind: Kind::Count, range: Range::Any, default: "1", doc: "Monte-Carlo seed" },
    Key { name: "samples", section: "mc", kind: Kind::Count, range: Range::Positive, default: "1000000", doc: "Monte-Carlo samples per point" },
    Key { name: "batch_size", section: "mc", kind: Kind::Count, range: Range::Positive, default: "65536", doc: "parallel work unit (does not change results)" },
    Key { name: "workers", section: "mc", kind: Kind::Count, range: Range::Any, default: "0", doc: "worker threads, 0 = all cores (does not change results)" },
];

fn key(name: &str) -> Option<&'static Key> {
    KEYS.iter().find(|k| k.name == name)
}

/// The key reference printed by `--help`.
pub fn key_reference() -> String {
    let mut s = String::from("CONFIG KEYS (key = value; optional [section] headers; # comments):\n");
    for sec in SECTIONS {
        s.push_str(&format!("\n  [{sec}]\n"));
        for k in KEYS.iter().filter(|k| k.section == *sec) {
            let d = if k.default.is_empty() { "derived".to_string() } else { k.default.to_string() };
            s.push_str(&format!("    {:<18} {}  [default {}]\n", k.name, k.doc, d));
        }
    }
    s
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    key_pos: Pos,
    value_pos: Pos,
}

/// A parsed file: each key at most once, values type- and range-checked.
#[derive(Debug, Clone, Default)]
pub struct Document {
    entries: BTreeMap<&'static str, Entry>,
}

fn check_value(k: &Key, v: &str, pos: Pos) -> Result<(), CliError> {
    let bad = |what: &str| Err(CliError::at(pos, format!("{}: {what}, got '{v}'", k.name)));
    match k.kind {
        Kind::Real => {
            let Ok(x) = v.parse::<f64>() else { return bad("expected a number") };
            if !x.is_finite() {
                return bad("expected a finite number");
            }
            let ok = match k.range {
                Range::Any => true,
                Range::Positive => x > 0.0,
                Range::NonNeg => x >= 0.0,
                Range::Fraction => x > 0.0 && x <= 1.0,
                Range::Prob => (0.0..=1.0).contains(&x),
            };
            if !ok {
                return bad(match k.range {
                    Range::Positive => "must be > 0",
                    Range::NonNeg => "must be >= 0",
                    Range::Fraction => "must be in (0, 1]",
                    _ => "must be in [0, 1]",
                });
            }
        }
        Kind::Count => {
            let Ok(n) = v.parse::<u64>() else { return bad("expected a non-negative integer") };
            if matches!(k.range, Range::Positive) && n == 0 {
                return bad("must be >= 1");
            }
        }
        Kind::Bool => {
            if !matches!(v, "true" | "false") {
                return bad("expected true or false");
            }
        }
        Kind::Choice(opts) => {
            if !opts.iter().any(|o| o.eq_ignore_ascii_case(v)) {
                return bad(&format!("expected one of {}", opts.join(", ")));
            }
        }
        Kind::List(opts) => {
            for item in v.split(',').map(str::trim) {
                if !opts.contains(&item.to_ascii_lowercase().as_str()) {
                    return Err(CliError::at(
                        pos,
                        format!("{}: '{item}' is not one of {}", k.name, opts.join(", ")),
                    ));
                }
            }
        }
    }
    Ok(())
}

impl Document {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut doc = Document::default();
        let mut section: Option<&'static str> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("");
            let indent = body.len() - body.trim_start().len();
            let t = body.trim();
            if t.is_empty() {
                continue;
            }
            let col0 = raw[..indent].chars().count() + 1;
            if let Some(rest) = t.strip_prefix('[') {
                let Some(name) = rest.strip_suffix(']') else {
                    return Err(CliError::at(Pos { line, col: col0 }, "unterminated section header"));
                };
                let name = name.trim();
                section = Some(SECTIONS.iter().copied().find(|s| *s == name).ok_or_else(|| {
                    CliError::at(
                        Pos { line, col: col0 + 1 },
                        format!("unknown section [{name}] (expected one of {})", SECTIONS.join(", ")),
                    )
                })?);
                continue;
            }
            let Some(eq) = t.find('=') else {
                return Err(CliError::at(Pos { line, col: col0 }, "expected 'key = value'"));
            };
            let name = t[..eq].trim();
            let key_pos = Pos { line, col: col0 };
            let k = key(name).ok_or_else(|| CliError::at(key_pos, format!("unknown key '{name}'")))?;
            if let Some(s) = section {
                if s != k.section {
                    return Err(CliError::at(key_pos, format!("key '{name}' belongs in [{}], not [{s}]", k.section)));
                }
            }
            let after = &t[eq + 1..];
            let value = after.trim();
            let lead = after.len() - after.trim_start().len();
            let value_pos = Pos { line, col: col0 + t[..eq + 1 + lead].chars().count() };
            if value.is_empty() {
                return Err(CliError::at(value_pos, format!("{name}: missing value")));
            }
            check_value(k, value, value_pos)?;
            if let Some(prev) = doc.entries.get(k.name) {
                return Err(CliError::at(
                    key_pos,
                    format!("duplicate key '{name}' (first set on line {})", prev.key_pos.line),
                ));
            }
            doc.entries.insert(k.name, Entry { value: value.to_string(), key_pos, value_pos });
        }
        Ok(doc)
    }

    /// Set (or replace) a value programmatically, as a preset or flag does.
    pub fn set(&mut self, name: &str, value: impl ToString) -> Result<(), CliError> {
        let k = key(name).ok_or_else(|| CliError::Config(format!("unknown key '{name}'")))?;
        let value = value.to_string();
        check_value(k, &value, Pos::default()).map_err(|e| match e {
            CliError::Parse { msg, .. } => CliError::Config(msg),
            e => e,
        })?;
        self.entries.insert(k.name, Entry { value, key_pos: Pos::default(), value_pos: Pos::default() });
        Ok(())
    }

    fn is_set(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    fn raw(&self, name: &str) -> &str {
        match self.entries.get(name) {
            Some(e) => &e.value,
            None => key(name).expect("known key").default,
        }
    }

    fn pos(&self, name: &str) -> Pos {
        self.entries.get(name).map(|e| e.key_pos).unwrap_or_default()
    }

    fn real(&self, name: &str) -> f64 {
        self.raw(name).parse().expect("checked at parse time")
    }

    fn count(&self, name: &str) -> u64 {
        self.raw(name).parse().expect("checked at parse time")
    }

    fn choice(&self, name: &str) -> String {
        self.raw(name).to_ascii_lowercase()
    }

    fn list(&self, name: &str) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for item in self.raw(name).split(',').map(|s| s.trim().to_ascii_lowercase()) {
            if !out.contains(&item) {
                out.push(item);
            }
        }
        out
    }

    /// Error at the key when it came from the file, plain otherwise.
    fn fail(&self, name: &str, msg: String) -> CliError {
        match self.entries.get(name) {
            Some(e) if e.key_pos.line > 0 => CliError::at(e.value_pos, msg),
            _ => CliError::Config(msg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    SnrDb,
    GammaThDb,
    Kappa,
    IboDb,
    Xi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Lock {
    Equal,
    Mu1,
    Mur,
    Kappa1,
    Kappa2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Op,
    Sep,
    Ec,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Op => "op",
            MetricKind::Sep => "sep",
            MetricKind::Ec => "ec",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Analytic,
    Asymptotic,
    Mc,
    Bounds,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::Asymptotic => "asymptotic",
            Method::Mc => "mc",
            Method::Bounds => "bounds",
        }
    }
}

/// Every physical parameter of one link, after defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct Params {
    pub M: u32,
    pub m: u32,
    pub rho_m: f64,
    pub alpha: f64,
    pub beta: u32,
    pub rho: f64,
    pub b0: f64,
    pub Omega: f64,
    pub dphi: f64,
    pub xi: f64,
    pub A0: f64,
    pub sigma_atten: f64,
    pub L_km: f64,
    pub r: u32,
    pub detection: String,
    pub include_path_loss: bool,
    pub protocol: String,
    pub hardware: String,
    pub kappa1: f64,
    pub kappa2: f64,
    pub hpa_kind: String,
    pub ibo_db: f64,
    pub gamma_th_db: f64,
    pub modulation_c: f64,
    pub varpi: f64,
    pub mu1_db: f64,
    pub mur_db: f64,
}

impl Params {
    pub fn protocol(&self) -> Protocol {
        if self.protocol == "DF" {
            Protocol::Df
        } else {
            Protocol::Af
        }
    }

    pub fn hardware_profile(&self) -> Result<HardwareProfile, CliError> {
        Ok(match self.hardware.as_str() {
            "ideal" => HardwareProfile::Ideal,
            "aggregate" => HardwareProfile::aggregate(self.kappa1, self.kappa2)?,
            _ => {
                let kind = if self.hpa_kind == "TWTA" { HpaKind::Twta } else { HpaKind::Sel };
                HardwareProfile::hpa(kind, self.ibo_db)?
            }
        })
    }

    /// The analytic/simulation link these parameters describe.
    pub fn link(&self) -> Result<LinkConfig, CliError> {
        if self.m > self.M {
            return Err(CliError::Config(format!("m = {} exceeds M = {}", self.m, self.M)));
        }
        let rf = RfHopParams::new(db_to_linear(self.mu1_db), self.M, self.m, self.rho_m)?;
        let turb = MalagaParams {
            alpha: self.alpha,
            beta: self.beta,
            rho: self.rho,
            b0: self.b0,
            omega: self.Omega,
            dphi: self.dphi,
        };
        let pp = PointingPathParams { xi: self.xi, a0: self.A0, sigma_atten: self.sigma_atten, l_km: self.L_km };
        let det = DetectionParams { r: self.r, mu_r: db_to_linear(self.mur_db) };
        let mut fso = FsoHop::new(&turb, pp, det)?;
        fso.include_path_loss = self.include_path_loss;
        let link = LinkConfig::new(rf, fso, self.hardware_profile()?, self.protocol())?;
        Ok(link.with_varpi(self.varpi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub x_axis: Axis,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub lock: Lock,
    pub metrics: Vec<MetricKind>,
    pub methods: Vec<Method>,
}

impl SweepSpec {
    /// start, start + step, … up to stop (kept when within 1e-9 steps).
    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }

    fn check(&self) -> Result<(), String> {
        if !(self.step > 0.0) {
            return Err("step must be > 0".into());
        }
        if !(self.start < self.stop) {
            return Err(format!("start ({}) must be below stop ({})", self.start, self.stop));
        }
        if self.metrics.is_empty() || self.methods.is_empty() {
            return Err("need at least one metric and one method".into());
        }
        if (self.stop - self.start) / self.step > 100_000.0 {
            return Err("more than 100000 sweep points".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McSpec {
    pub seed: u64,
    pub samples: u64,
    pub batch_size: u64,
    pub workers: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: Params,
    pub sweep: SweepSpec,
    pub mc: McSpec,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        Self::resolve(&Document::parse(text)?)
    }

    /// Defaults filled in and cross-key rules checked.
    pub fn resolve(doc: &Document) -> Result<Self, CliError> {
        let r_from_det = if doc.choice("detection") == "heterodyne" { 1 } else { 2 };
        let r = match (doc.is_set("r"), doc.is_set("detection")) {
            (true, true) => {
                let r = doc.count("r") as u32;
                if r != r_from_det {
                    let later = if doc.pos("r").line > doc.pos("detection").line { "r" } else { "detection" };
                    return Err(doc.fail(later, "r and detection disagree".into()));
                }
                r
            }
            (true, false) => doc.count("r") as u32,
            (false, true) => r_from_det,
            (false, false) => doc.count("r") as u32,
        };
        let hardware = doc.choice("hardware");
        for k in ["kappa1", "kappa2"] {
            if doc.is_set(k) && hardware != "aggregate" {
                return Err(doc.fail(k, format!("{k} needs hardware = aggregate (hardware is {hardware})")));
            }
        }
        for k in ["hpa_kind", "ibo_db"] {
            if doc.is_set(k) && hardware != "hpa" {
                return Err(doc.fail(k, format!("{k} needs hardware = hpa (hardware is {hardware})")));
            }
        }
        let (m, big_m) = (doc.count("m"), doc.count("M"));
        if m > big_m {
            return Err(doc.fail(if doc.is_set("m") { "m" } else { "M" }, format!("m = {m} exceeds M = {big_m}")));
        }
        let beta = doc.count("beta");
        if beta > 1000 {
            return Err(doc.fail("beta", format!("beta = {beta} is beyond the supported 1..1000")));
        }
        let snr = doc.real("snr_db");
        let varpi = if doc.is_set("varpi") {
            doc.real("varpi")
        } else {
            DetectionParams { r, mu_r: 1.0 }.default_varpi()
        };
        let params = Params {
            M: big_m as u32,
            m: m as u32,
            rho_m: doc.real("rho_m"),
            alpha: doc.real("alpha"),
            beta: beta as u32,
            rho: doc.real("rho"),
            b0: doc.real("b0"),
            Omega: doc.real("Omega"),
            dphi: doc.real("dphi"),
            xi: doc.real("xi"),
            A0: doc.real("A0"),
            sigma_atten: doc.real("sigma_atten"),
            L_km: doc.real("L_km"),
            r,
            detection: if r == 1 { "heterodyne" } else { "imdd" }.into(),
            include_path_loss: doc.raw("include_path_loss") == "true",
            protocol: doc.choice("protocol").to_ascii_uppercase(),
            hardware,
            kappa1: doc.real("kappa1"),
            kappa2: doc.real("kappa2"),
            hpa_kind: doc.choice("hpa_kind").to_ascii_uppercase(),
            ibo_db: doc.real("ibo_db"),
            gamma_th_db: doc.real("gamma_th_db"),
            modulation_c: doc.real("modulation_c"),
            varpi,
            mu1_db: if doc.is_set("mu1_db") { doc.real("mu1_db") } else { snr },
            mur_db: if doc.is_set("mur_db") { doc.real("mur_db") } else { snr },
        };

        let x_axis = match doc.choice("x_axis").as_str() {
            "snr_db" => Axis::SnrDb,
            "gamma_th_db" => Axis::GammaThDb,
            "kappa" => Axis::Kappa,
            "ibo_db" => Axis::IboDb,
            _ => Axis::Xi,
        };
        let lock = match doc.choice("lock").as_str() {
            "equal" => Lock::Equal,
            "mu1" => Lock::Mu1,
            "mur" => Lock::Mur,
            "kappa1" => Lock::Kappa1,
            _ => Lock::Kappa2,
        };
        let lock_ok = match x_axis {
            Axis::SnrDb => matches!(lock, Lock::Equal | Lock::Mu1 | Lock::Mur),
            Axis::Kappa => matches!(lock, Lock::Equal | Lock::Kappa1 | Lock::Kappa2),
            _ => lock == Lock::Equal,
        };
        if !lock_ok {
            return Err(doc.fail("lock", format!("lock = {} does not apply to x_axis = {}", doc.raw("lock"), doc.raw("x_axis"))));
        }
        let metrics = doc
            .list("metrics")
            .iter()
            .map(|s| match s.as_str() {
                "op" => MetricKind::Op,
                "sep" => MetricKind::Sep,
                _ => MetricKind::Ec,
            })
            .collect();
        let methods = doc
            .list("methods")
            .iter()
            .map(|s| match s.as_str() {
                "analytic" => Method::Analytic,
                "asymptotic" => Method::Asymptotic,
                "mc" => Method::Mc,
                _ => Method::Bounds,
            })
            .collect();
        let sweep = SweepSpec {
            x_axis,
            start: doc.real("start"),
            stop: doc.real("stop"),
            step: doc.real("step"),
            lock,
            metrics,
            methods,
        };
        if let Err(msg) = sweep.check() {
            let at = if msg.starts_with("step") { "step" } else if doc.is_set("stop") { "stop" } else { "start" };
            return Err(doc.fail(at, msg));
        }
        let mc = McSpec {
            seed: doc.count("seed"),
            samples: doc.count("samples"),
            batch_size: doc.count("batch_size"),
            workers: doc.count("workers"),
        };
        let cfg = RunConfig { params, sweep, mc };
        cfg.check_axis()?;
        Ok(cfg)
    }

    /// Axis/model pairings that cannot be evaluated.
    fn check_axis(&self) -> Result<(), CliError> {
        let p = &self.params;
        if p.protocol == "DF" && p.hardware == "hpa" {
            return Err(CliError::Unsupported(
                "DF relaying with a nonlinear relay amplifier (hardware = hpa is AF-only)".into(),
            ));
        }
        match self.sweep.x_axis {
            Axis::Kappa if p.hardware != "aggregate" => Err(CliError::Unsupported(format!(
                "x_axis = kappa sweeps the aggregate impairment model, hardware is {}",
                p.hardware
            ))),
            Axis::IboDb if p.hardware != "hpa" => Err(CliError::Unsupported(format!(
                "x_axis = ibo_db sweeps the amplifier back-off, hardware is {}",
                p.hardware
            ))),
            Axis::Kappa if self.sweep.start < 0.0 => {
                Err(CliError::Config("kappa sweep must start at >= 0".into()))
            }
            Axis::Xi if self.sweep.start <= 0.0 => Err(CliError::Config("xi sweep must start above 0".into())),
            _ => Ok(()),
        }
    }

    /// The parameters at one grid point, and the outage threshold (dB).
    pub fn at(&self, x: f64) -> Params {
        let mut p = self.params.clone();
        match (self.sweep.x_axis, self.sweep.lock) {
            (Axis::SnrDb, Lock::Mu1) => p.mu1_db = x,
            (Axis::SnrDb, Lock::Mur) => p.mur_db = x,
            (Axis::SnrDb, _) => {
                p.mu1_db = x;
                p.mur_db = x;
            }
            (Axis::GammaThDb, _) => p.gamma_th_db = x,
            (Axis::Kappa, Lock::Kappa1) => p.kappa1 = x,
            (Axis::Kappa, Lock::Kappa2) => p.kappa2 = x,
            (Axis::Kappa, _) => {
                p.kappa1 = x;
                p.kappa2 = x;
            }
            (Axis::IboDb, _) => p.ibo_db = x,
            (Axis::Xi, _) => p.xi = x,
        }
        p
    }
}

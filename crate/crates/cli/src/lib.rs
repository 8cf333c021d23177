//! Command-line front end: config files in, curve.csv / meta.json /
//! notes.md out.
//!
//! Exit status: 0 success, 1 bad input (with line:column for config
//! files), 2 Monte-Carlo validation breach, 3 unsupported model
//! combination.

pub mod config;
pub mod figures;
pub mod output;
pub mod sweep;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use rfso_core::montecarlo::{self as mc, Tolerances, ValidationPlan};
use rfso_core::db_to_linear;

use config::{CliError, Method, RunConfig};
use sweep::{SeriesResult, Validation};

#[derive(Parser, Debug)]
#[command(
    name = "rfso",
    version,
    about = "Outage, SEP and ergodic capacity of mixed RF/FSO relaying: closed forms, asymptotes and Monte Carlo",
    after_help = config::key_reference()
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Sweep one parameter and write curve.csv, meta.json and notes.md.
    Sweep {
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Require |analytic - mc| <= 3 stderr wherever OP >= 1e-3 (exit 2 otherwise).
        #[arg(long)]
        validate: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Reproduce one of the reference figures (2..12).
    Figure {
        #[arg(value_parser = clap::value_parser!(u8).range(2..=12))]
        n: u8,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<u64>,
    },
    /// Run the analytic-vs-simulation suite (distributions and metric grid).
    Validate {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<u64>,
    },
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    RunConfig::parse(&text).map_err(|e| match e {
        CliError::Parse { line, col, msg } => CliError::Parse { line, col, msg: format!("{}: {msg}", path.display()) },
        e => e,
    })
}

fn overrides(cfg: &mut RunConfig, seed: Option<u64>, samples: Option<u64>) -> Result<(), CliError> {
    if let Some(s) = seed {
        cfg.mc.seed = s;
    }
    if let Some(n) = samples {
        if n == 0 {
            return Err(CliError::Config("--samples must be >= 1".into()));
        }
        cfg.mc.samples = n;
    }
    Ok(())
}

fn sweep_notes(r: &SeriesResult, validation: Option<&Validation>, added: &[&str]) -> String {
    let c = &r.config;
    let mut s = String::from("# Sweep\n\n");
    let _ = writeln!(
        s,
        "x = {:?} from {} to {} step {} ({} points), lock {:?}.",
        c.sweep.x_axis,
        c.sweep.start,
        c.sweep.stop,
        c.sweep.step,
        r.points.len(),
        c.sweep.lock
    );
    let p = &c.params;
    let _ = writeln!(
        s,
        "{} relaying, {} hardware, r = {}, gamma_th = {} dB, varpi = {:.6}.",
        p.protocol, p.hardware, p.r, p.gamma_th_db, p.varpi
    );
    if c.sweep.methods.contains(&Method::Mc) {
        let _ = writeln!(s, "Monte Carlo: seed {}, {} samples per point.", c.mc.seed, c.mc.samples);
    }
    if !added.is_empty() {
        let _ = writeln!(s, "Validation mode added methods: {}.", added.join(", "));
    }
    if let Some(v) = r.derived.capacity_ceiling {
        let _ = writeln!(s, "Capacity ceiling: {v:.6} bps/Hz.");
    }
    notes_tail(&mut s, std::slice::from_ref(r), validation);
    s
}

fn notes_tail(s: &mut String, results: &[SeriesResult], validation: Option<&Validation>) {
    let undefined: Vec<String> = results
        .iter()
        .flat_map(|r| r.undefined.iter().map(move |u| if r.label.is_empty() { u.clone() } else { format!("{}:{u}", r.label) }))
        .collect();
    if !undefined.is_empty() {
        s.push_str("\n## Empty columns\n\n");
        for u in undefined {
            let _ = writeln!(s, "- {u}");
        }
    }
    let errors: Vec<String> = results
        .iter()
        .flat_map(|r| r.points.iter().flat_map(move |p| p.errors.iter().map(move |e| format!("{}x = {}: {e}", tag(r), p.x))))
        .collect();
    if !errors.is_empty() {
        s.push_str("\n## Cells left empty by numerical failures\n\n");
        for e in errors {
            let _ = writeln!(s, "- {e}");
        }
    }
    let fallbacks: usize = results.iter().map(|r| r.points.iter().filter(|p| p.ec_fallback).count()).sum();
    if fallbacks > 0 {
        let _ = writeln!(s, "\n{fallbacks} closed-form capacity point(s) fell back to quadrature (column analytic_ec_fallback).");
    }
    let warnings: usize = results.iter().map(|r| r.points.iter().map(|p| p.warnings.len()).sum::<usize>()).sum();
    if warnings > 0 {
        let _ = writeln!(s, "\n{warnings} Monte-Carlo estimate(s) rest on fewer than 10 events (see meta.json).");
    }
    if let Some(v) = validation {
        s.push_str("\n## Validation\n\n");
        let _ = writeln!(
            s,
            "{} comparisons, {} skipped (OP < 1e-3), max |z| = {:.2}: {}",
            v.checked,
            v.skipped,
            v.max_z,
            if v.passed() { "PASS" } else { "FAIL" }
        );
        for b in &v.breaches {
            let _ = writeln!(s, "- {b}");
        }
    }
}

fn tag(r: &SeriesResult) -> String {
    if r.label.is_empty() {
        String::new()
    } else {
        format!("{}: ", r.label)
    }
}

fn write_run(dir: &Path, command: String, results: &[SeriesResult], v: Option<&Validation>, notes: &str) -> Result<(), CliError> {
    let csv = output::curve_csv(results);
    let meta = output::meta_json(command, results, v)?;
    output::write_all(dir, &[("curve.csv", &csv), ("meta.json", &meta), ("notes.md", notes)])
}

fn run_sweep(path: &Path, out: &Path, validate: bool, seed: Option<u64>, samples: Option<u64>) -> Result<i32, CliError> {
    let mut cfg = load(path)?;
    overrides(&mut cfg, seed, samples)?;
    let mut added = Vec::new();
    if validate {
        for m in [Method::Analytic, Method::Mc] {
            if !cfg.sweep.methods.contains(&m) {
                cfg.sweep.methods.push(m);
                added.push(m.name());
            }
        }
    }
    let result = sweep::evaluate("", &cfg)?;
    let v = validate.then(|| sweep::validate(std::slice::from_ref(&result), &Tolerances::default()));
    let notes = sweep_notes(&result, v.as_ref(), &added);
    write_run(out, format!("sweep {}", path.display()), std::slice::from_ref(&result), v.as_ref(), &notes)?;
    match &v {
        Some(v) if !v.passed() => {
            eprintln!("validation breach:");
            for b in &v.breaches {
                eprintln!("  {b}");
            }
            Ok(2)
        }
        _ => Ok(0),
    }
}

fn run_figure(n: u8, out: &Path, seed: Option<u64>, samples: Option<u64>) -> Result<i32, CliError> {
    let mut fig = figures::preset(n)?;
    for s in &mut fig.series {
        overrides(&mut s.cfg, seed, samples)?;
    }
    let results: Vec<SeriesResult> =
        fig.series.iter().map(|s| sweep::evaluate(&s.label, &s.cfg)).collect::<Result<_, _>>()?;
    let mut notes = format!("# Figure {n}: {}\n\n", fig.title);
    let _ = writeln!(notes, "Series: {}.", fig.series.iter().map(|s| s.label.as_str()).collect::<Vec<_>>().join(", "));
    let first = &fig.series[0].cfg;
    let _ = writeln!(
        notes,
        "x = {:?} from {} to {} step {}; Monte Carlo seed {}, {} samples per point.",
        first.sweep.x_axis, first.sweep.start, first.sweep.stop, first.sweep.step, first.mc.seed, first.mc.samples
    );
    notes.push_str("\n## Parameters not stated with the figure\n\n");
    for u in &fig.unstated {
        let _ = writeln!(notes, "- {u}");
    }
    let found = figures::findings(n, &results);
    if !found.is_empty() {
        notes.push_str("\n## Read off the curves\n\n");
        for f in found {
            let _ = writeln!(notes, "- {f}");
        }
    }
    notes_tail(&mut notes, &results, None);
    write_run(out, format!("figure {n}"), &results, None, &notes)?;
    Ok(0)
}

fn run_validate(path: &Path, seed: Option<u64>, samples: Option<u64>) -> Result<i32, CliError> {
    let mut cfg = load(path)?;
    overrides(&mut cfg, seed, samples)?;
    let link = cfg.params.link()?;
    let plan = ValidationPlan {
        gamma_th: db_to_linear(cfg.params.gamma_th_db),
        modulation_c: cfg.params.modulation_c,
        dist_samples: cfg.mc.samples.min(ValidationPlan::default().dist_samples),
        ..ValidationPlan::default()
    };
    let report = mc::validate(&link, &sweep::sim_config(&cfg.mc), &Tolerances::default(), &plan);
    print!("{}", report.render());
    Ok(if report.passed() { 0 } else { 2 })
}

/// Parse `args` (program name first) and run; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let res = match cli.cmd {
        Cmd::Sweep { config, out, validate, seed, samples } => run_sweep(&config, &out, validate, seed, samples),
        Cmd::Figure { n, out, seed, samples } => run_figure(n, &out, seed, samples),
        Cmd::Validate { config, seed, samples } => run_validate(&config, seed, samples),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

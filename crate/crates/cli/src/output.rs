//! curve.csv / meta.json / notes.md, written all-or-nothing.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::CliError;
use crate::sweep::{SeriesResult, Validation};

/// Nine significant digits, shortest of fixed/scientific, trailing zeros
/// dropped.
pub fn fmt9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan" } else if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    let s = format!("{v:.8e}");
    let (mant, exp) = s.split_once('e').expect("exponent");
    let e: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&e) {
        trim(format!("{:.*}", (8 - e) as usize, v))
    } else {
        format!("{}e{e}", trim(mant.to_string()))
    }
}

fn trim(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// One x column shared by all series; series columns prefixed `label:`
/// when there is more than one.
pub fn curve_csv(results: &[SeriesResult]) -> String {
    let mut out = String::from("x");
    let prefix = |r: &SeriesResult| if r.label.is_empty() { String::new() } else { format!("{}:", r.label) };
    for r in results {
        for c in &r.columns {
            out.push(',');
            out.push_str(&prefix(r));
            out.push_str(&c.name);
        }
    }
    out.push('\n');
    let n = results.first().map_or(0, |r| r.points.len());
    for i in 0..n {
        out.push_str(&fmt9(results[0].points[i].x));
        for r in results {
            for c in &r.columns {
                out.push(',');
                if let Some(v) = c.values[i] {
                    out.push_str(&fmt9(v));
                }
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
pub struct Meta<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub series: &'a [SeriesResult],
    pub validation: Option<&'a Validation>,
}

pub fn meta_json(command: String, results: &[SeriesResult], validation: Option<&Validation>) -> Result<String, CliError> {
    let meta = Meta { tool: "rfso", version: env!("CARGO_PKG_VERSION"), command, series: results, validation };
    let mut s = serde_json::to_string_pretty(&meta).map_err(|e| CliError::Runtime(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Write every file under a temporary name first, then rename them into
/// place; a failure leaves no partial output behind.
pub fn write_all(dir: &Path, files: &[(&str, &str)]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    let mut staged = Vec::new();
    for (name, body) in files {
        let tmp = dir.join(format!(".{name}.tmp"));
        let res = fs::File::create(&tmp).and_then(|mut f| {
            f.write_all(body.as_bytes())?;
            f.sync_all()
        });
        if let Err(e) = res {
            for t in &staged {
                let _ = fs::remove_file(t);
            }
            let _ = fs::remove_file(&tmp);
            return Err(io(e));
        }
        staged.push(tmp);
    }
    for (tmp, (name, _)) in staged.iter().zip(files) {
        fs::rename(tmp, dir.join(name)).map_err(io)?;
    }
    Ok(())
}

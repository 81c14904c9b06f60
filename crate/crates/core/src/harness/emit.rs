//! Output files of a run: report.json, residuals.csv and timeseries.csv.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::run::{RunReport, TimeSeries};

/// C `%.17g`: 17 significant digits, trailing zeros removed, exponent form
/// outside 1e-4 ≤ |v| < 1e17.
pub fn fmt_g17(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let digits = (16 - exp).max(0) as usize;
        trim(&format!("{v:.digits$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn residuals_csv(report: &RunReport) -> String {
    let mut out = String::from("report,law,linf,l2,tol,pass\n");
    for r in &report.reports {
        for l in &r.laws {
            let _ = writeln!(out, "{},{},{},{},{},{}", r.regime, l.law, fmt_g17(l.linf), fmt_g17(l.l2), fmt_g17(l.tol), l.pass);
        }
    }
    out
}

pub fn timeseries_csv(ts: &TimeSeries) -> String {
    let mut out = ts.columns.join(",");
    out.push('\n');
    for row in &ts.rows {
        let cells: Vec<String> = row.iter().map(|v| fmt_g17(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf> {
    std::fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

/// Writes the run's files into `dir` (created if missing) and returns their paths.
pub fn emit(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))?;
    let mut out = vec![write(dir.join("report.json"), &json)?, write(dir.join("residuals.csv"), &residuals_csv(report))?];
    if let Some(ts) = &report.timeseries {
        out.push(write(dir.join("timeseries.csv"), &timeseries_csv(ts))?);
    }
    Ok(out)
}

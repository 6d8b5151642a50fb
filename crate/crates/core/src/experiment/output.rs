//! Report artifacts: `report.json`, `runtime.json`, `paths.csv`,
//! `trace.csv` and the long-run `lil.csv`. CSV floats carry 17 significant
//! digits so they parse back to the same `f64`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::lil::LilReport;
use super::report::{ExperimentReport, RuntimeStats};
use super::run::PathRun;
use crate::error::{Error, Result};

pub const REPORT_FILE: &str = "report.json";
pub const RUNTIME_FILE: &str = "runtime.json";
pub const PATHS_FILE: &str = "paths.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const LIL_FILE: &str = "lil.csv";
pub const LIL_REPORT_FILE: &str = "lil_report.json";

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_f64(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

fn write_rows(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write `report.json`, `paths.csv` and, when any path was traced,
/// `trace.csv` into `dir`. Returns the files written.
pub fn write_experiment(dir: &Path, report: &ExperimentReport, runs: &[PathRun]) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();

    let report_path = dir.join(REPORT_FILE);
    write_json(&report_path, report)?;
    written.push(report_path);

    let paths_path = dir.join(PATHS_FILE);
    write_rows(
        &paths_path,
        &[
            "path_id",
            "in_E_alpha",
            "sup_ln_Z_upper",
            "first_crossing_t",
            "max_violation_margin",
            "final_R",
            "final_R_err",
            "bound_violations",
            "conditional_violations",
            "unverified_steps",
            "cs_covered",
            "max_lil_stat",
        ],
        runs.iter().map(|r| {
            vec![
                r.ville.path_id.to_string(),
                r.ville.in_e_alpha.to_string(),
                fmt_f64(r.ville.sup_ln_z_upper),
                opt(r.ville.first_crossing_t),
                opt_f64(r.max_violation_margin),
                fmt_f64(r.final_regret),
                fmt_f64(r.final_regret_err),
                r.bound_violations.to_string(),
                r.conditional_violations.to_string(),
                r.unverified_steps.to_string(),
                opt(r.cs_covered),
                opt_f64(r.max_lil_stat),
            ]
        }),
    )?;
    written.push(paths_path);

    if runs.iter().any(|r| !r.trace.is_empty()) {
        let trace_path = dir.join(TRACE_FILE);
        write_rows(
            &trace_path,
            &[
                "path_id", "t", "S", "V", "ln_Z", "R", "branch", "bound", "cond_bound", "cs_lo", "cs_hi", "covered",
            ],
            runs.iter().flat_map(|r| {
                r.trace.iter().map(move |row| {
                    vec![
                        r.ville.path_id.to_string(),
                        row.t.to_string(),
                        fmt_f64(row.s),
                        fmt_f64(row.v),
                        fmt_f64(row.ln_z),
                        fmt_f64(row.regret),
                        opt(row.branch),
                        opt_f64(row.bound),
                        opt_f64(row.cond_bound),
                        opt_f64(row.cs_lo),
                        opt_f64(row.cs_hi),
                        opt(row.covered),
                    ]
                })
            }),
        )?;
        written.push(trace_path);
    }
    Ok(written)
}

pub fn write_runtime(dir: &Path, stats: &RuntimeStats) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let path = dir.join(RUNTIME_FILE);
    write_json(&path, stats)?;
    Ok(path)
}

/// Write `lil_report.json` and the checkpoint table `lil.csv`.
pub fn write_lil(dir: &Path, report: &LilReport) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let json = dir.join(LIL_REPORT_FILE);
    write_json(&json, report)?;
    let table = dir.join(LIL_FILE);
    write_rows(
        &table,
        &[
            "path_id",
            "t",
            "V",
            "S",
            "R_over_lnlnV",
            "gaussian_R_minus_ln1pV",
            "slln_stat",
            "lil_stat",
            "running_max_lil",
            "tail_max_lil",
            "in_E_alpha_robbins",
            "in_E_alpha_gaussian",
        ],
        report.paths.iter().flat_map(|p| {
            p.checkpoints.iter().map(move |c| {
                vec![
                    p.path_id.to_string(),
                    c.t.to_string(),
                    fmt_f64(c.v),
                    fmt_f64(c.s),
                    opt_f64(c.regret_ratio),
                    fmt_f64(c.gaussian_excess),
                    fmt_f64(c.slln_stat),
                    opt_f64(c.lil_stat),
                    opt_f64(c.running_max_lil),
                    opt_f64(c.tail_max_lil),
                    c.in_e_alpha_robbins.to_string(),
                    c.in_e_alpha_gaussian.to_string(),
                ]
            })
        }),
    )?;
    Ok(vec![json, table])
}

/// Read `report.json` back.
pub fn read_report(path: &Path) -> Result<ExperimentReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

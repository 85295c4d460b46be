// Copyright 2026 cvent Contributors
// SPDX-License-Identifier: Apache-2.0

//! CSV tables and the JSON run record.
//!
//! Floats are written with 17 significant digits, which round-trips
//! every `f64`. Missing values are empty fields.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::checks::CheckOutcome;
use crate::error::{CliError, CliResult};
use crate::run::{CellResult, RunResults};
use crate::scenario::{OutputKind, Plan, ScenarioFile};

pub const RUN_RECORD_FORMAT: &str = "cvent-run-record";
pub const RUN_RECORD_FILE: &str = "run_record.json";
pub const COMPARISON_FILE: &str = "comparison.txt";

const SIGMA_LABELS: [&str; 16] = [
    "s11", "s12", "s13", "s14", "s21", "s22", "s23", "s24", "s31", "s32", "s33", "s34", "s41", "s42", "s43", "s44",
];

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

struct Table {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
}

impl Table {
    fn create(dir: &Path, name: &str, header: &[String]) -> CliResult<Table> {
        let path = dir.join(name);
        let writer = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
        let mut t = Table { path, writer };
        t.row(header)?;
        Ok(t)
    }

    fn row(&mut self, fields: &[String]) -> CliResult<()> {
        self.writer.write_record(fields).map_err(|e| csv_err(&self.path, e))
    }

    fn finish(mut self) -> CliResult<String> {
        self.writer.flush().map_err(|e| CliError::io(self.path.clone(), e))?;
        Ok(self
            .path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default())
    }
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    let kind = match e.kind() {
        csv::ErrorKind::Io(io) => io.kind(),
        _ => std::io::ErrorKind::Other,
    };
    CliError::io(path, std::io::Error::new(kind, e.to_string()))
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn cell_columns(c: &CellResult) -> Vec<String> {
    let p = &c.params;
    vec![
        p.index.to_string(),
        fmt_f64(p.alpha_tilde),
        fmt_f64(p.kappa_tilde),
        fmt_f64(p.n_th),
        fmt_f64(p.z),
    ]
}

const CELL_HEADER: [&str; 5] = ["cell", "alpha_tilde", "kappa_tilde", "n_th", "z"];

/// Writes every requested table into `dir`; returns file names in
/// write order.
pub fn write_tables(plan: &Plan, results: &RunResults, dir: &Path) -> CliResult<Vec<String>> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut files = Vec::new();
    for kind in &plan.outputs {
        match kind {
            OutputKind::Trajectory => files.extend(write_trajectories(results, dir)?),
            OutputKind::SteadyState => files.push(write_steady_state(results, dir)?),
            OutputKind::EntanglementMap => files.push(write_entanglement_map(plan, results, dir)?),
            OutputKind::PrecisionMap => files.push(write_precision_map(results, dir)?),
            OutputKind::Report => files.push(write_report(results, dir)?),
        }
    }
    Ok(files)
}

fn write_trajectories(results: &RunResults, dir: &Path) -> CliResult<Vec<String>> {
    let mut names = Vec::new();
    for c in &results.cells {
        let Some(points) = &c.trajectory else { continue };
        let mut h = header(&["tau"]);
        h.extend(header(&CELL_HEADER[1..]));
        h.extend(header(&["e_n", "nu_minus", "delta_tilde", "det_sigma"]));
        h.extend(header(&SIGMA_LABELS));
        let mut t = Table::create(dir, &format!("trajectory_{:03}.csv", c.params.index), &h)?;
        for p in points {
            let mut row = vec![fmt_f64(p.tau)];
            row.extend(cell_columns(c).into_iter().skip(1));
            row.extend([
                fmt_f64(p.report.e_n),
                fmt_f64(p.report.nu_minus),
                fmt_f64(p.report.delta_tilde),
                fmt_f64(p.report.det_sigma),
            ]);
            row.extend(p.sigma.to_row_major().iter().map(|&v| fmt_f64(v)));
            t.row(&row)?;
        }
        names.push(t.finish()?);
    }
    Ok(names)
}

fn write_steady_state(results: &RunResults, dir: &Path) -> CliResult<String> {
    let mut h = header(&CELL_HEADER);
    h.extend(header(&[
        "stability",
        "e_n",
        "e_n_nats",
        "e_n_closed_form",
        "nu_minus",
        "nu_plus",
        "delta_tilde",
        "det_sigma",
        "entangled",
    ]));
    h.extend(header(&SIGMA_LABELS));
    let mut t = Table::create(dir, "steady_state.csv", &h)?;
    for c in &results.cells {
        let Some(s) = &c.steady else { continue };
        let mut row = cell_columns(c);
        row.extend([
            c.stability.to_string(),
            fmt_f64(s.report.e_n),
            fmt_f64(s.report.e_n_nats()),
            fmt_f64(s.e_n_closed_form),
            fmt_f64(s.report.nu_minus),
            fmt_f64(s.report.nu_plus),
            fmt_f64(s.report.delta_tilde),
            fmt_f64(s.report.det_sigma),
            s.report.entangled.to_string(),
        ]);
        row.extend(s.sigma.to_row_major().iter().map(|&v| fmt_f64(v)));
        t.row(&row)?;
    }
    t.finish()
}

fn write_entanglement_map(plan: &Plan, results: &RunResults, dir: &Path) -> CliResult<String> {
    let mut h: Vec<String> = plan.axes.iter().map(|a| a.param.as_str().to_string()).collect();
    h.extend(header(&["e_n", "e_n_nats", "nu_minus", "entangled"]));
    let mut t = Table::create(dir, "entanglement_map.csv", &h)?;
    for c in &results.cells {
        let Some(s) = &c.steady else { continue };
        let mut row: Vec<String> = plan.axes.iter().map(|a| fmt_opt(c.params.get(a.param))).collect();
        row.extend([
            fmt_f64(s.report.e_n),
            fmt_f64(s.report.e_n_nats()),
            fmt_f64(s.report.nu_minus),
            s.report.entangled.to_string(),
        ]);
        t.row(&row)?;
    }
    t.finish()
}

fn write_precision_map(results: &RunResults, dir: &Path) -> CliResult<String> {
    let h = header(&["alpha_tilde", "epsilon", "e_n", "delta_e_n", "relative_error", "flag"]);
    let mut t = Table::create(dir, "precision_map.csv", &h)?;
    for c in &results.cells {
        let Some(p) = &c.precision else { continue };
        t.row(&[
            fmt_f64(p.alpha_tilde),
            fmt_f64(p.epsilon),
            fmt_opt(p.e_n),
            fmt_opt(p.delta_e_n),
            fmt_opt(p.relative_error),
            p.flag.as_str().to_string(),
        ])?;
    }
    t.finish()
}

fn write_report(results: &RunResults, dir: &Path) -> CliResult<String> {
    let mut h = header(&CELL_HEADER);
    h.extend(header(&[
        "epsilon",
        "stability",
        "e_n",
        "e_n_nats",
        "nu_minus",
        "entangled",
        "delta_e_n",
        "relative_error",
        "partials_sum",
        "flag",
    ]));
    let mut t = Table::create(dir, "report.csv", &h)?;
    for c in &results.cells {
        let Some(s) = &c.steady else { continue };
        let mut row = cell_columns(c);
        let b = c.budget;
        row.extend([
            fmt_opt(c.params.epsilon),
            c.stability.to_string(),
            fmt_f64(s.report.e_n),
            fmt_f64(s.report.e_n_nats()),
            fmt_f64(s.report.nu_minus),
            s.report.entangled.to_string(),
            fmt_opt(b.and_then(|b| b.delta_e_n)),
            fmt_opt(b.and_then(|b| b.relative_error)),
            fmt_opt(b.and_then(|b| b.partials_sum)),
            b.map(|b| b.flag.as_str().to_string()).unwrap_or_default(),
        ]);
        t.row(&row)?;
    }
    t.finish()
}

#[derive(Debug, Serialize)]
struct CellSummary {
    #[serde(flatten)]
    params: crate::scenario::CellParams,
    stability: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    e_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    e_n_nats: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nu_minus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_e_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    relative_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    flag: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trajectory_max_e_n: Option<f64>,
}

fn summarize(c: &CellResult) -> CellSummary {
    let budget_flag = c.budget.map(|b| b.flag).or(c.precision.map(|p| p.flag));
    CellSummary {
        params: c.params,
        stability: c.stability.to_string(),
        e_n: c
            .steady
            .as_ref()
            .map(|s| s.report.e_n)
            .or(c.precision.and_then(|p| p.e_n)),
        e_n_nats: c.steady.as_ref().map(|s| s.report.e_n_nats()),
        nu_minus: c.steady.as_ref().map(|s| s.report.nu_minus),
        delta_e_n: c
            .budget
            .and_then(|b| b.delta_e_n)
            .or(c.precision.and_then(|p| p.delta_e_n)),
        relative_error: c
            .budget
            .and_then(|b| b.relative_error)
            .or(c.precision.and_then(|p| p.relative_error)),
        flag: budget_flag.map(|f| f.as_str()),
        trajectory_max_e_n: c
            .trajectory
            .as_ref()
            .and_then(|t| t.iter().map(|p| p.report.e_n).reduce(f64::max)),
    }
}

#[derive(Debug, Serialize)]
struct RunRecord<'a> {
    format: &'static str,
    software_version: &'static str,
    timestamp_unix: u64,
    scenario: &'a ScenarioFile,
    resolved: &'a Plan,
    results: Vec<CellSummary>,
    files: &'a [String],
    #[serde(skip_serializing_if = "<[CheckOutcome]>::is_empty")]
    checks: &'a [CheckOutcome],
}

/// Writes the run record. Feeding it back to `cvent run` repeats the run.
pub fn write_run_record(
    scenario: &ScenarioFile,
    plan: &Plan,
    results: &RunResults,
    files: &[String],
    checks: &[CheckOutcome],
    dir: &Path,
) -> CliResult<String> {
    let record = RunRecord {
        format: RUN_RECORD_FORMAT,
        software_version: env!("CARGO_PKG_VERSION"),
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        scenario,
        resolved: plan,
        results: results.cells.iter().map(summarize).collect(),
        files,
        checks,
    };
    let path = dir.join(RUN_RECORD_FILE);
    let text = serde_json::to_string_pretty(&record)
        .map_err(|e| CliError::Numeric(format!("cannot serialize run record: {e}")))?;
    fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(RUN_RECORD_FILE.to_string())
}

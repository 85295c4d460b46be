// Copyright 2026 cvent Contributors
// SPDX-License-Identifier: Apache-2.0

//! Batch front end for `cvent-core`: scenario files in, CSV tables and a
//! JSON run record out.

pub mod checks;
pub mod error;
pub mod output;
pub mod reproduce;
pub mod run;
pub mod scenario;

use std::fs;
use std::path::{Path, PathBuf};

pub use error::{exit, CliError, CliResult, FieldError};
pub use scenario::{parse_scenario, resolve, Plan, ScenarioFile};

use checks::CheckOutcome;

/// What a finished run wrote.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub scenario: String,
    pub out_dir: PathBuf,
    pub files: Vec<String>,
    pub checks: Vec<CheckOutcome>,
}

/// Validates, executes and writes one scenario into `out`.
pub fn run_scenario(scenario: &ScenarioFile, out: &Path, jobs: Option<usize>) -> CliResult<RunSummary> {
    let plan = resolve(scenario)?;
    let results = run::execute(&plan, jobs)?;
    let mut files = output::write_tables(&plan, &results, out)?;
    let outcomes: Vec<CheckOutcome> = plan.checks.iter().map(|c| checks::evaluate(c, &results)).collect();
    if !outcomes.is_empty() || !plan.notes.is_empty() {
        let path = out.join(output::COMPARISON_FILE);
        fs::write(&path, checks::render(&plan.name, &outcomes, &plan.notes)).map_err(|e| CliError::io(&path, e))?;
        files.push(output::COMPARISON_FILE.to_string());
    }
    let record = output::write_run_record(scenario, &plan, &results, &files, &outcomes, out)?;
    files.push(record);
    Ok(RunSummary {
        scenario: plan.name,
        out_dir: out.to_path_buf(),
        files,
        checks: outcomes,
    })
}

/// Reads a scenario file (or a run record) from disk.
pub fn load_scenario(path: &Path) -> CliResult<ScenarioFile> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_scenario(&text, &path.display().to_string())
}

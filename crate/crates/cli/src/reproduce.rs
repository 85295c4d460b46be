// Copyright 2026 cvent Contributors
// SPDX-License-Identifier: Apache-2.0

//! Built-in scenarios and reproduction targets.
//!
//! The scenario files live in `scenarios/` and are compiled in as data.

use std::path::Path;

use crate::error::{CliError, CliResult, FieldError};
use crate::scenario::{parse_scenario, ScenarioFile};
use crate::{run_scenario, RunSummary};

const BUILTIN: [(&str, &str); 9] = [
    ("table1", include_str!("../scenarios/table1.json")),
    ("table2", include_str!("../scenarios/table2.json")),
    ("fig2a", include_str!("../scenarios/fig2a.json")),
    ("fig2b", include_str!("../scenarios/fig2b.json")),
    ("fig3a", include_str!("../scenarios/fig3a.json")),
    ("fig3b", include_str!("../scenarios/fig3b.json")),
    ("fig4", include_str!("../scenarios/fig4.json")),
    ("fig5", include_str!("../scenarios/fig5.json")),
    ("fig6", include_str!("../scenarios/fig6.json")),
];

/// Reproduction targets and the scenarios each one runs.
pub const TARGETS: [(&str, &[&str]); 7] = [
    ("table1", &["table1"]),
    ("table2", &["table2"]),
    ("fig2", &["fig2a", "fig2b"]),
    ("fig3", &["fig3a", "fig3b"]),
    ("fig4", &["fig4"]),
    ("fig5", &["fig5"]),
    ("fig6", &["fig6"]),
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTIN.iter().map(|(n, _)| *n)
}

pub fn builtin_scenario(name: &str) -> CliResult<ScenarioFile> {
    let text = BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            CliError::Validation(vec![FieldError::new(
                "scenario",
                format!("no built-in scenario `{name}`"),
            )])
        })?;
    parse_scenario(text, &format!("built-in scenario {name}"))
}

pub fn scenarios_for(target: &str) -> CliResult<&'static [&'static str]> {
    TARGETS
        .iter()
        .find(|(t, _)| *t == target)
        .map(|(_, s)| *s)
        .ok_or_else(|| {
            let known = TARGETS.iter().map(|(t, _)| *t).collect::<Vec<_>>().join(", ");
            CliError::Validation(vec![FieldError::new(
                "target",
                format!("unknown target `{target}` (known: {known})"),
            )])
        })
}

/// Runs each scenario of `target` into `out/<scenario>/`.
pub fn reproduce(target: &str, out: &Path, jobs: Option<usize>) -> CliResult<Vec<RunSummary>> {
    scenarios_for(target)?
        .iter()
        .map(|name| {
            let scenario = builtin_scenario(name)?;
            run_scenario(&scenario, &out.join(name), jobs)
        })
        .collect()
}

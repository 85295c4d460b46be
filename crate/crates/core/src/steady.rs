// Copyright 2026 cvent Contributors
// SPDX-License-Identifier: Apache-2.0

//! Interchangeable routes to the stationary covariance matrix.
//!
//! `closed_form` evaluates the analytic entries; `kronecker` solves the
//! Lyapunov equation numerically. Each is the other's oracle.

use crate::cv::{make_hamiltonian, CovarianceMatrix};
use crate::dynamics::{steady_state_numeric, NoiseModel};
use crate::entanglement::steady_state_closed_form;
use crate::error::{CoreError, Result};
use crate::registry::Registry;

pub const DEFAULT_STEADY_STATE_SOLVER: &str = "closed_form";

pub trait SteadyStateSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, alpha_tilde: f64, noise: &NoiseModel) -> Result<CovarianceMatrix>;
}

pub struct ClosedForm;
pub struct KroneckerLyapunov;

impl SteadyStateSolver for ClosedForm {
    fn name(&self) -> &'static str {
        "closed_form"
    }
    fn solve(&self, alpha_tilde: f64, noise: &NoiseModel) -> Result<CovarianceMatrix> {
        steady_state_closed_form(alpha_tilde, noise)
    }
}

impl SteadyStateSolver for KroneckerLyapunov {
    fn name(&self) -> &'static str {
        "kronecker"
    }
    fn solve(&self, alpha_tilde: f64, noise: &NoiseModel) -> Result<CovarianceMatrix> {
        steady_state_numeric(&make_hamiltonian(alpha_tilde)?, noise)
    }
}

pub fn steady_state_solvers() -> Registry<dyn SteadyStateSolver> {
    let mut reg: Registry<dyn SteadyStateSolver> = Registry::new();
    for solver in [
        Box::new(ClosedForm) as Box<dyn SteadyStateSolver>,
        Box::new(KroneckerLyapunov),
    ] {
        reg.register(solver.name(), solver);
    }
    reg
}

pub fn lookup_solver<'a>(
    registry: &'a Registry<dyn SteadyStateSolver>,
    name: &str,
) -> Result<&'a dyn SteadyStateSolver> {
    registry.get(name).ok_or_else(|| {
        CoreError::param(
            "steady_state_method",
            format!(
                "unknown steady-state method `{name}` (known: {})",
                registry.names().collect::<Vec<_>>().join(", ")
            ),
        )
    })
}

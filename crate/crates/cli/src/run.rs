// Copyright 2026 cvent Contributors
// SPDX-License-Identifier: Apache-2.0

//! Executes a [`Plan`] cell by cell on a rayon pool.

use cvent_core::dynamics::trajectory;
use cvent_core::entanglement::steady_state_log_negativity;
use cvent_core::metrology::{precision_row, propagate_error, CellFlag, PrecisionCell};
use cvent_core::potentials::check_stability;
use cvent_core::steady::{lookup_solver, steady_state_solvers, SteadyStateSolver};
use cvent_core::{
    log_negativity, make_hamiltonian, squeezed_state, CovarianceMatrix, EntanglementReport, EvolveOptions, NoiseModel,
    SqueezingParameter, Stability,
};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::scenario::{CellParams, OutputKind, Plan};

#[derive(Debug, Clone)]
pub struct SteadyResult {
    pub sigma: CovarianceMatrix,
    pub report: EntanglementReport,
    /// `E_N` from the closed-form `Λ` expression, independent of `sigma`.
    pub e_n_closed_form: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetResult {
    pub delta_e_n: Option<f64>,
    pub relative_error: Option<f64>,
    pub partials_sum: Option<f64>,
    pub flag: CellFlag,
}

#[derive(Debug, Clone)]
pub struct TrajectoryPoint {
    pub tau: f64,
    pub sigma: CovarianceMatrix,
    pub report: EntanglementReport,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub params: CellParams,
    pub stability: Stability,
    pub steady: Option<SteadyResult>,
    pub budget: Option<BudgetResult>,
    pub trajectory: Option<Vec<TrajectoryPoint>>,
    pub precision: Option<PrecisionCell>,
}

impl CellResult {
    /// `E_N` of the trajectory point at `tau` (exact grid match).
    pub fn trajectory_e_n(&self, tau: f64) -> Option<f64> {
        self.trajectory
            .as_ref()?
            .iter()
            .find(|p| (p.tau - tau).abs() <= 1e-9 * tau.abs().max(1.0))
            .map(|p| p.report.e_n)
    }
}

#[derive(Debug, Clone)]
pub struct RunResults {
    pub cells: Vec<CellResult>,
}

fn build_pool(jobs: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        b = b.num_threads(n);
    }
    b.build()
        .map_err(|e| CliError::Numeric(format!("cannot start worker pool: {e}")))
}

/// Runs every cell. Results are in cell order regardless of `jobs`.
pub fn execute(plan: &Plan, jobs: Option<usize>) -> CliResult<RunResults> {
    let registry = steady_state_solvers();
    let solver = lookup_solver(&registry, &plan.steady_state_method)?;
    let pool = build_pool(jobs)?;
    pool.install(|| {
        let mut cells: Vec<CellResult> = plan
            .cells
            .par_iter()
            .map(|c| compute_cell(plan, c, solver))
            .collect::<CliResult<_>>()?;
        if plan.wants(OutputKind::PrecisionMap) {
            let precision = precision_cells(plan, solver);
            for (cell, p) in cells.iter_mut().zip(precision) {
                cell.precision = Some(p);
            }
        }
        Ok(RunResults { cells })
    })
}

fn compute_cell(plan: &Plan, c: &CellParams, solver: &dyn SteadyStateSolver) -> CliResult<CellResult> {
    let stability = check_stability(c.alpha_tilde);
    let dynamic = plan.needs_steady_state() || plan.wants(OutputKind::Trajectory);
    if dynamic && stability == Stability::Unstable && !plan.allow_unstable {
        return Err(CliError::Stability(format!(
            "cell {} has alpha_tilde = {} <= -1/2: the trapped Hamiltonian is unbounded \
             (set allow_unstable to evolve it anyway)",
            c.index, c.alpha_tilde
        )));
    }
    let noise = NoiseModel::new(c.kappa_tilde, c.n_th)?;

    let steady = if plan.needs_steady_state() {
        let sigma = solver.solve(c.alpha_tilde, &noise).map_err(|e| in_cell(c, e))?;
        let report = log_negativity(&sigma).map_err(|e| in_cell(c, e))?;
        let e_n_closed_form = steady_state_log_negativity(c.alpha_tilde, &noise).map_err(|e| in_cell(c, e))?;
        Some(SteadyResult {
            sigma,
            report,
            e_n_closed_form,
        })
    } else {
        None
    };

    let budget = match (&steady, plan.wants(OutputKind::Report), plan.error_spec_for(c)) {
        (Some(s), true, Some(spec)) => Some(budget(s, &spec)),
        _ => None,
    };

    let trajectory = if plan.wants(OutputKind::Trajectory) {
        let h = make_hamiltonian(c.alpha_tilde)?;
        let sigma0 = squeezed_state(SqueezingParameter::new(c.z)?);
        let opts = EvolveOptions {
            allow_unstable: plan.allow_unstable,
        };
        let points = trajectory(&sigma0, &h, &noise, &plan.taus, &opts).map_err(|e| in_cell(c, e))?;
        let points = points
            .into_iter()
            .map(|(tau, sigma)| {
                let report = log_negativity(&sigma).map_err(|e| in_cell(c, e))?;
                Ok(TrajectoryPoint { tau, sigma, report })
            })
            .collect::<CliResult<Vec<_>>>()?;
        Some(points)
    } else {
        None
    };

    Ok(CellResult {
        params: *c,
        stability,
        steady,
        budget,
        trajectory,
        precision: None,
    })
}

fn in_cell(c: &CellParams, e: cvent_core::CoreError) -> CliError {
    match CliError::from(e) {
        CliError::Numeric(msg) => CliError::Numeric(format!(
            "cell {} (alpha_tilde = {}, kappa_tilde = {}, n_th = {}): {msg}",
            c.index, c.alpha_tilde, c.kappa_tilde, c.n_th
        )),
        other => other,
    }
}

fn budget(s: &SteadyResult, spec: &cvent_core::metrology::ErrorSpec) -> BudgetResult {
    if !s.report.entangled {
        return BudgetResult {
            delta_e_n: None,
            relative_error: None,
            partials_sum: None,
            flag: CellFlag::Separable,
        };
    }
    match propagate_error(&s.sigma, spec) {
        Ok(b) => BudgetResult {
            delta_e_n: Some(b.delta_e_n),
            relative_error: Some(b.relative_error),
            partials_sum: Some(b.partials.sum()),
            flag: if b.relative_error > 1.0 {
                CellFlag::ExceedsUnity
            } else {
                CellFlag::Ok
            },
        },
        Err(_) => BudgetResult {
            delta_e_n: None,
            relative_error: None,
            partials_sum: None,
            flag: CellFlag::Failed,
        },
    }
}

/// Precision-map entries aligned with `plan.cells`; partials are shared
/// by all cells with the same coupling.
fn precision_cells(plan: &Plan, solver: &dyn SteadyStateSolver) -> Vec<PrecisionCell> {
    let mut alphas: Vec<f64> = Vec::new();
    for c in &plan.cells {
        if !alphas.contains(&c.alpha_tilde) {
            alphas.push(c.alpha_tilde);
        }
    }
    let rows: Vec<Vec<PrecisionCell>> = alphas
        .par_iter()
        .map(|&a| {
            let cells: Vec<&CellParams> = plan.cells.iter().filter(|c| c.alpha_tilde == a).collect();
            let eps: Vec<f64> = cells.iter().map(|c| c.epsilon.unwrap_or(0.0)).collect();
            // The map is taken at the first cell's noise; only alpha and
            // epsilon vary across a precision map.
            let noise = NoiseModel::new(cells[0].kappa_tilde, cells[0].n_th).expect("validated noise");
            precision_row(a, &eps, &noise, solver)
        })
        .collect();
    plan.cells
        .iter()
        .map(|c| {
            let row = alphas.iter().position(|&a| a == c.alpha_tilde).expect("alpha listed");
            let col = plan
                .cells
                .iter()
                .filter(|x| x.alpha_tilde == c.alpha_tilde)
                .position(|x| x.index == c.index)
                .expect("cell listed");
            rows[row][col]
        })
        .collect()
}

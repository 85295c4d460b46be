// Copyright 2026 cvent Contributors
// SPDX-License-Identifier: Apache-2.0

//! Entanglement of two trapped oscillators coupled through a linearized
//! central potential, in the Gaussian covariance-matrix formalism.
//!
//! The pipeline runs from physical parameters to certification precision:
//!
//! - [`potentials`]: SI scenario → dimensionless coupling `α̃`, stability
//! - [`cv`]: covariance matrices, the Hamiltonian matrix, initial states
//! - [`dynamics`]: symplectic and Lyapunov evolution, numeric steady state
//! - [`entanglement`]: PPT spectrum, log-negativity, closed-form steady state
//! - [`metrology`]: error propagation from covariance entries to `E_N`
//!
//! Coupling models and steady-state solvers are strategies looked up by
//! name in a [`registry::Registry`].

mod dd;
mod expm;

pub mod cv;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod metrology;
pub mod potentials;
pub mod registry;
pub mod steady;

pub use cv::{
    check_physicality, make_hamiltonian, squeezed_state, symplectic_form, CovarianceMatrix, Mat4, Physicality,
    QuadraticHamiltonian, SqueezingParameter,
};
pub use dynamics::{
    evolve_closed, evolve_open, propagator, steady_state_numeric, DriftDiffusion, EvolveOptions, NoiseModel,
};
pub use entanglement::{
    log_negativity, ppt_invariants, steady_state_closed_form, steady_state_nu_minus, EntanglementReport,
};
pub use error::{CoreError, Result};
pub use expm::expm;
pub use potentials::{check_stability, PotentialSpec, Stability};

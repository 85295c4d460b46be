// Copyright 2026 cvent Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unphysical covariance matrix: {0}")]
    Unphysical(String),

    #[error(
        "unstable Hamiltonian at alpha_tilde = {alpha_tilde}: attractive coupling must satisfy alpha_tilde > -1/2"
    )]
    Unstable { alpha_tilde: f64 },

    #[error("no steady state: {0}")]
    NoSteadyState(String),

    #[error("singular parameters: {0}")]
    SingularParameter(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("logarithmic negativity is not differentiable here: {0}")]
    NonDifferentiable(String),
}

impl CoreError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        CoreError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;

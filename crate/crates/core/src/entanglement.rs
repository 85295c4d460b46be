// Copyright 2026 cvent Contributors
// SPDX-License-Identifier: Apache-2.0

//! Partial-transpose spectrum, logarithmic negativity, and the closed-form
//! stationary state of the damped coupled oscillators.
//!
//! With `σ = [[σ_A, σ_AB], [σ_ABᵀ, σ_B]]` the partial transpose only flips
//! the sign of `det σ_AB`, so
//!
//! ```text
//! Δ̃ = det σ_A + det σ_B − 2 det σ_AB
//! ν̃∓² = (Δ̃ ∓ sqrt(Δ̃² − 4 det σ)) / 2
//! E_N = max(0, −log₂ ν̃₋)
//! ```
//!
//! The spectrum is accumulated in double-double precision. For the weak
//! couplings of gravitational scenarios `ν̃₋` sits ~1e-8 below one and the
//! f64 radicand would be pure rounding noise.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::cv::{two_mode_spectrum, BlockSign, CovarianceMatrix, Mat4};
use crate::dynamics::NoiseModel;
use crate::error::{CoreError, Result};
use crate::potentials::{check_stability, Stability};

/// `ν̃₋` within this distance of one counts as separable.
pub const SEPARABILITY_TOL: f64 = 1e-10;

/// Radicand values down to `−RADICAND_TOL · max(1, Δ̃²)` are clamped to 0.
pub const RADICAND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PptInvariants {
    pub det_a: f64,
    pub det_b: f64,
    pub det_ab: f64,
    pub delta: f64,
    pub delta_tilde: f64,
    pub det_sigma: f64,
}

pub fn ppt_invariants(sigma: &CovarianceMatrix) -> PptInvariants {
    let sp = two_mode_spectrum(sigma.matrix(), BlockSign::PartialTranspose);
    let det_a = sp.det_a.to_f64();
    let det_b = sp.det_b.to_f64();
    let det_ab = sp.det_ab.to_f64();
    PptInvariants {
        det_a,
        det_b,
        det_ab,
        delta: (sp.det_a + sp.det_b + sp.det_ab * 2.0).to_f64(),
        delta_tilde: sp.delta.to_f64(),
        det_sigma: sp.det_sigma.to_f64(),
    }
}

/// Flat summary of the entanglement of a two-mode state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntanglementReport {
    pub delta_tilde: f64,
    pub det_sigma: f64,
    pub nu_minus: f64,
    pub nu_plus: f64,
    /// Logarithmic negativity in bits (log base 2).
    pub e_n: f64,
    /// `det σ − Δ̃ + 1 ≥ 0` (up to [`SEPARABILITY_TOL`]).
    pub ppt_satisfied: bool,
    pub entangled: bool,
}

impl EntanglementReport {
    /// The same quantity with a natural logarithm, `max(0, −ln ν̃₋)`.
    pub fn e_n_nats(&self) -> f64 {
        self.e_n * LN_2
    }

    /// `det σ − Δ̃ + 1 = (1 − ν̃₋²)(1 − ν̃₊²)`.
    pub fn ppt_margin(&self) -> f64 {
        self.det_sigma - self.delta_tilde + 1.0
    }
}

/// `−log₂ ν` given `ν² − 1`, clamped at the separability threshold.
fn bits_from_nu_sq_offset(nu_sq_minus_one: f64) -> (f64, bool) {
    let nu = (1.0 + nu_sq_minus_one).sqrt();
    if nu < 1.0 - SEPARABILITY_TOL {
        (-0.5 * nu_sq_minus_one.ln_1p() / LN_2, true)
    } else {
        (0.0, false)
    }
}

pub fn log_negativity(sigma: &CovarianceMatrix) -> Result<EntanglementReport> {
    let sp = two_mode_spectrum(sigma.matrix(), BlockSign::PartialTranspose);
    let delta_tilde = sp.delta.to_f64();
    let radicand = sp.radicand.to_f64();
    if radicand < -RADICAND_TOL * delta_tilde.powi(2).max(1.0) {
        return Err(CoreError::Numeric(format!(
            "negative partial-transpose radicand {radicand:e}; covariance matrix is corrupted"
        )));
    }
    let nu_sq_minus = sp.nu_sq_minus.to_f64();
    if nu_sq_minus < 0.0 {
        return Err(CoreError::Numeric(format!(
            "negative squared symplectic eigenvalue {nu_sq_minus:e}"
        )));
    }
    let offset = (sp.nu_sq_minus - 1.0.into()).to_f64();
    let (e_n, entangled) = bits_from_nu_sq_offset(offset);
    Ok(EntanglementReport {
        delta_tilde,
        det_sigma: sp.det_sigma.to_f64(),
        nu_minus: nu_sq_minus.sqrt(),
        nu_plus: sp.nu_sq_plus.to_f64().sqrt(),
        e_n,
        ppt_satisfied: !entangled,
        entangled,
    })
}

/// Independent entries of the stationary covariance matrix.
///
/// The rest follow from symmetry and the exchange symmetry of the two
/// oscillators: `σ33 = σ11`, `σ44 = σ22`, `σ34 = σ12`, `σ23 = σ14`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyStateClosedForm {
    pub s11: f64,
    pub s22: f64,
    pub s12: f64,
    pub s14: f64,
    pub s13: f64,
    pub s24: f64,
    /// `Λ = (4α̃² + 8α̃ + κ̃² + 4) / (8α̃ + κ̃² + 4)`.
    pub lambda: f64,
    /// `Λ − 1 = 4α̃² / (8α̃ + κ̃² + 4)`, kept separately to avoid cancellation.
    pub lambda_minus_one: f64,
    pub thermal_factor: f64,
}

impl SteadyStateClosedForm {
    pub fn new(alpha_tilde: f64, noise: &NoiseModel) -> Result<Self> {
        if !alpha_tilde.is_finite() {
            return Err(CoreError::param("alpha_tilde", "must be finite"));
        }
        if noise.kappa_tilde() <= 0.0 {
            return Err(CoreError::NoSteadyState(
                "undamped dynamics (kappa_tilde = 0) has no attracting steady state".into(),
            ));
        }
        if check_stability(alpha_tilde) == Stability::Unstable {
            return Err(CoreError::Unstable { alpha_tilde });
        }
        let a = alpha_tilde;
        let k2 = noise.kappa_tilde().powi(2);
        let den = 8.0 * a + k2 + 4.0;
        if den == 0.0 || !den.is_finite() {
            return Err(CoreError::SingularParameter(format!(
                "8 alpha_tilde + kappa_tilde^2 + 4 = {den}"
            )));
        }
        let s = noise.thermal_factor();
        let ak = a * noise.kappa_tilde();
        let lambda_minus_one = 4.0 * a * a / den;
        Ok(SteadyStateClosedForm {
            s11: (6.0 * a + k2 + 4.0) / den * s,
            s22: (4.0 * a * a + 10.0 * a + k2 + 4.0) / den * s,
            s12: -ak / den * s,
            s14: ak / den * s,
            s13: 2.0 * a / den * s,
            s24: -2.0 * a * (2.0 * a + 1.0) / den * s,
            lambda: (4.0 * a * a + 8.0 * a + k2 + 4.0) / den,
            lambda_minus_one,
            thermal_factor: s,
        })
    }

    pub fn to_covariance(&self) -> CovarianceMatrix {
        let (s11, s22, s12, s13, s14, s24) = (self.s11, self.s22, self.s12, self.s13, self.s14, self.s24);
        CovarianceMatrix::new(Mat4::new(
            s11, s12, s13, s14, //
            s12, s22, s14, s24, //
            s13, s14, s11, s12, //
            s14, s24, s12, s22,
        ))
        .expect("closed form is symmetric by construction")
    }

    /// `ν̃₋ = (2N_th+1) sqrt(Λ − sqrt((Λ−1)Λ))`.
    pub fn nu_minus(&self) -> f64 {
        self.thermal_factor * (1.0 + self.reduced_offset()).sqrt()
    }

    /// `E_N` in bits, from `ν̃₋` above.
    pub fn log_negativity(&self) -> f64 {
        // ln ν̃₋ = ln(2N_th+1) + ½ ln(1 + u)
        let ln_nu = self.thermal_factor.ln() + 0.5 * self.reduced_offset().ln_1p();
        if self.nu_minus() < 1.0 - SEPARABILITY_TOL {
            -ln_nu / LN_2
        } else {
            0.0
        }
    }

    /// `u = Λ − sqrt((Λ−1)Λ) − 1`, evaluated from `Λ − 1` directly.
    fn reduced_offset(&self) -> f64 {
        let d = self.lambda_minus_one;
        d - (d * (1.0 + d)).sqrt()
    }
}

pub fn steady_state_closed_form(alpha_tilde: f64, noise: &NoiseModel) -> Result<CovarianceMatrix> {
    Ok(SteadyStateClosedForm::new(alpha_tilde, noise)?.to_covariance())
}

pub fn steady_state_nu_minus(alpha_tilde: f64, noise: &NoiseModel) -> Result<f64> {
    let cf = SteadyStateClosedForm::new(alpha_tilde, noise)?;
    if cf.lambda_minus_one < -1e-12 {
        return Err(CoreError::Numeric(format!(
            "Lambda - 1 = {:e} < 0",
            cf.lambda_minus_one
        )));
    }
    Ok(cf.nu_minus())
}

/// Stationary `E_N` (bits) through the `Λ` formula.
pub fn steady_state_log_negativity(alpha_tilde: f64, noise: &NoiseModel) -> Result<f64> {
    let cf = SteadyStateClosedForm::new(alpha_tilde, noise)?;
    if cf.lambda_minus_one < -1e-12 {
        return Err(CoreError::Numeric(format!(
            "Lambda - 1 = {:e} < 0",
            cf.lambda_minus_one
        )));
    }
    Ok(cf.log_negativity())
}

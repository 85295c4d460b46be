// Copyright 2026 cvent Contributors
// SPDX-License-Identifier: Apache-2.0

//! Covariance-matrix data model for two equal oscillators.
//!
//! Quadratures are dimensionless and ordered `(x1, p1, x2, p2)`. The vacuum
//! covariance is the identity. Physical positions and momenta relate to the
//! dimensionless ones through [`POSITION_SCALE`] and [`MOMENTUM_SCALE`];
//! those factors never enter a computation, because ħ is absorbed when time
//! is measured in units of `1/ω_m`.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{CoreError, Result};

pub type Mat4 = Matrix4<f64>;

/// Absolute tolerance on `σ - σᵀ` accepted as "symmetric".
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Default slack on the uncertainty bound `ν ≥ 1`.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// `x = sqrt(ħ/(m ω_m)) · x'`. Documentation only.
pub const POSITION_SCALE: &str = "sqrt(hbar / (m * omega_m))";
/// `p = sqrt(ħ m ω_m) · p'`. Documentation only.
pub const MOMENTUM_SCALE: &str = "sqrt(hbar * m * omega_m)";

/// The fixed quadrature ordering shared by every matrix in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadratureOrdering;

impl QuadratureOrdering {
    pub const LABELS: [&'static str; 4] = ["x1", "p1", "x2", "p2"];
    pub const TAG: &'static str = "x1,p1,x2,p2";
}

/// Block-diagonal symplectic form `⊕ [[0, 1], [-1, 0]]`.
pub fn symplectic_form() -> Mat4 {
    Mat4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

/// Symmetric 4×4 second-moment matrix.
///
/// Symmetry is enforced at construction. Physicality (the uncertainty
/// principle) is a separate check, see [`check_physicality`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(Mat4);

impl CovarianceMatrix {
    pub fn new(m: Mat4) -> Result<Self> {
        ensure_finite(&m)?;
        let asym = max_asymmetry(&m);
        if asym > SYMMETRY_TOL {
            return Err(CoreError::InvalidInput(format!(
                "covariance matrix is not symmetric (max |σ_ij - σ_ji| = {asym:e})"
            )));
        }
        Ok(CovarianceMatrix(m))
    }

    /// Wraps `(m + mᵀ)/2`. Used after every evolution step.
    pub fn symmetrized(m: &Mat4) -> Self {
        CovarianceMatrix((m + m.transpose()) * 0.5)
    }

    pub fn identity() -> Self {
        CovarianceMatrix(Mat4::identity())
    }

    pub fn from_row_major(values: &[f64; 16]) -> Result<Self> {
        Self::new(Mat4::from_row_slice(values))
    }

    pub fn to_row_major(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        for r in 0..4 {
            for c in 0..4 {
                out[4 * r + c] = self.0[(r, c)];
            }
        }
        out
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn into_matrix(self) -> Mat4 {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }

    pub fn determinant(&self) -> f64 {
        det4_dd(&self.0).to_f64()
    }

    pub fn physicality(&self) -> Result<Physicality> {
        check_physicality(&self.0)
    }
}

/// Row-major serialized form: 16 reals plus the ordering tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerializedMatrix {
    pub ordering: String,
    pub elements: Vec<f64>,
}

impl From<&CovarianceMatrix> for SerializedMatrix {
    fn from(s: &CovarianceMatrix) -> Self {
        SerializedMatrix {
            ordering: QuadratureOrdering::TAG.to_string(),
            elements: s.to_row_major().to_vec(),
        }
    }
}

impl TryFrom<&SerializedMatrix> for CovarianceMatrix {
    type Error = CoreError;

    fn try_from(s: &SerializedMatrix) -> Result<Self> {
        if s.ordering != QuadratureOrdering::TAG {
            return Err(CoreError::InvalidInput(format!(
                "unsupported quadrature ordering `{}` (expected `{}`)",
                s.ordering,
                QuadratureOrdering::TAG
            )));
        }
        let values: [f64; 16] =
            s.elements.as_slice().try_into().map_err(|_| {
                CoreError::InvalidInput(format!("expected 16 matrix elements, got {}", s.elements.len()))
            })?;
        CovarianceMatrix::from_row_major(&values)
    }
}

impl Serialize for CovarianceMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SerializedMatrix::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CovarianceMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SerializedMatrix::deserialize(deserializer)?;
        CovarianceMatrix::try_from(&raw).map_err(serde::de::Error::custom)
    }
}

/// Dimensionless Hamiltonian matrix `H̃ = I + α̃ H₁ − α̃ H₂`.
///
/// `H₁` puts ones on both position diagonals and `H₂` couples `x1` with
/// `x2`, so the position block is `[[1+α̃, −α̃], [−α̃, 1+α̃]]` and the
/// momentum block is the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticHamiltonian {
    alpha_tilde: f64,
    h: Mat4,
}

impl QuadraticHamiltonian {
    pub fn alpha_tilde(&self) -> f64 {
        self.alpha_tilde
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.h
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let eig = self.h.symmetric_eigen();
        let mut v: [f64; 4] = eig.eigenvalues.into();
        v.sort_by(f64::total_cmp);
        v
    }
}

pub fn make_hamiltonian(alpha_tilde: f64) -> Result<QuadraticHamiltonian> {
    if !alpha_tilde.is_finite() {
        return Err(CoreError::param("alpha_tilde", "must be finite"));
    }
    let mut h = Mat4::identity();
    h[(0, 0)] += alpha_tilde;
    h[(2, 2)] += alpha_tilde;
    h[(0, 2)] -= alpha_tilde;
    h[(2, 0)] -= alpha_tilde;
    Ok(QuadraticHamiltonian { alpha_tilde, h })
}

/// Squeezing factor `z > 0` of the initial product state.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SqueezingParameter(f64);

impl SqueezingParameter {
    pub fn new(z: f64) -> Result<Self> {
        if !(z.is_finite() && z > 0.0) {
            return Err(CoreError::param("z", format!("must be finite and > 0, got {z}")));
        }
        Ok(SqueezingParameter(z))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for SqueezingParameter {
    type Error = CoreError;
    fn try_from(z: f64) -> Result<Self> {
        SqueezingParameter::new(z)
    }
}

impl From<SqueezingParameter> for f64 {
    fn from(z: SqueezingParameter) -> f64 {
        z.0
    }
}

/// `diag(z, 1/z, 1/z, z)`: mode 1 stretched in `x`, mode 2 in `p`.
pub fn squeezed_state(z: SqueezingParameter) -> CovarianceMatrix {
    let z = z.value();
    CovarianceMatrix(Mat4::from_diagonal(&nalgebra::Vector4::new(z, 1.0 / z, 1.0 / z, z)))
}

/// Two-mode squeezed vacuum with squeezing `r`; `ν̃₋ = e^{-r}`.
pub fn two_mode_squeezed_vacuum(r: f64) -> CovarianceMatrix {
    let (c, s) = (r.cosh(), r.sinh());
    CovarianceMatrix(Mat4::new(
        c, 0.0, s, 0.0, //
        0.0, c, 0.0, -s, //
        s, 0.0, c, 0.0, //
        0.0, -s, 0.0, c,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Physicality {
    Physical,
    Unphysical(Violation),
}

impl Physicality {
    pub fn is_physical(&self) -> bool {
        matches!(self, Physicality::Physical)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotPositiveDefinite { min_eigenvalue: f64 },
    SymplecticEigenvalue { nu_minus: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NotPositiveDefinite { min_eigenvalue } => {
                write!(f, "not positive definite (smallest eigenvalue {min_eigenvalue:e})")
            }
            Violation::SymplecticEigenvalue { nu_minus } => {
                write!(f, "symplectic eigenvalue {nu_minus} violates nu >= 1")
            }
        }
    }
}

pub fn check_physicality(sigma: &Mat4) -> Result<Physicality> {
    check_physicality_with_tol(sigma, PHYSICALITY_TOL)
}

pub fn check_physicality_with_tol(sigma: &Mat4, tol: f64) -> Result<Physicality> {
    ensure_finite(sigma)?;
    let asym = max_asymmetry(sigma);
    if asym > SYMMETRY_TOL {
        return Err(CoreError::InvalidInput(format!(
            "covariance matrix is not symmetric (max |σ_ij - σ_ji| = {asym:e})"
        )));
    }
    let sym = (sigma + sigma.transpose()) * 0.5;
    if sym.cholesky().is_none() {
        let min_eigenvalue = sym.symmetric_eigenvalues().min();
        return Ok(Physicality::Unphysical(Violation::NotPositiveDefinite {
            min_eigenvalue,
        }));
    }
    let spectrum = two_mode_spectrum(&sym, BlockSign::Plain);
    let nu_minus = spectrum.nu_sq_minus.to_f64().max(0.0).sqrt();
    if nu_minus < 1.0 - tol {
        return Ok(Physicality::Unphysical(Violation::SymplecticEigenvalue { nu_minus }));
    }
    Ok(Physicality::Physical)
}

/// Checks symmetry and physicality, turning a violation into an error.
pub(crate) fn require_physical(sigma: &CovarianceMatrix) -> Result<()> {
    match check_physicality(sigma.matrix())? {
        Physicality::Physical => Ok(()),
        Physicality::Unphysical(v) => Err(CoreError::Unphysical(v.to_string())),
    }
}

fn ensure_finite(m: &Mat4) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(CoreError::InvalidInput("matrix has non-finite entries".into()))
    }
}

fn max_asymmetry(m: &Mat4) -> f64 {
    (m - m.transpose()).abs().max()
}

/// Sign applied to `det σ_AB`: `Plain` gives the symplectic spectrum of
/// `σ`, `PartialTranspose` the spectrum after `p2 → −p2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum BlockSign {
    Plain,
    PartialTranspose,
}

pub(crate) struct TwoModeSpectrum {
    pub det_a: Dd,
    pub det_b: Dd,
    pub det_ab: Dd,
    pub delta: Dd,
    pub det_sigma: Dd,
    pub radicand: Dd,
    pub nu_sq_minus: Dd,
    pub nu_sq_plus: Dd,
}

fn minor2(m: &Mat4, r0: usize, r1: usize, c0: usize, c1: usize) -> Dd {
    Dd::from(m[(r0, c0)]) * Dd::from(m[(r1, c1)]) - Dd::from(m[(r0, c1)]) * Dd::from(m[(r1, c0)])
}

/// Determinant by Laplace expansion over the 2×2 minors of rows {0,1}.
pub(crate) fn det4_dd(m: &Mat4) -> Dd {
    let s0 = minor2(m, 0, 1, 0, 1);
    let s1 = minor2(m, 0, 1, 0, 2);
    let s2 = minor2(m, 0, 1, 0, 3);
    let s3 = minor2(m, 0, 1, 1, 2);
    let s4 = minor2(m, 0, 1, 1, 3);
    let s5 = minor2(m, 0, 1, 2, 3);
    let c5 = minor2(m, 2, 3, 2, 3);
    let c4 = minor2(m, 2, 3, 1, 3);
    let c3 = minor2(m, 2, 3, 1, 2);
    let c2 = minor2(m, 2, 3, 0, 3);
    let c1 = minor2(m, 2, 3, 0, 2);
    let c0 = minor2(m, 2, 3, 0, 1);
    s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
}

/// Two-mode symplectic spectrum `ν∓² = (Δ ∓ sqrt(Δ² − 4 det σ))/2`,
/// accumulated in double-double. The radicand is returned unclamped.
pub(crate) fn two_mode_spectrum(m: &Mat4, sign: BlockSign) -> TwoModeSpectrum {
    let det_a = minor2(m, 0, 1, 0, 1);
    let det_b = minor2(m, 2, 3, 2, 3);
    let det_ab = minor2(m, 0, 1, 2, 3);
    let cross = det_ab * 2.0;
    let delta = match sign {
        BlockSign::Plain => det_a + det_b + cross,
        BlockSign::PartialTranspose => det_a + det_b - cross,
    };
    let det_sigma = det4_dd(m);
    let radicand = delta * delta - det_sigma * 4.0;
    let root = if radicand.is_sign_negative() {
        Dd::ZERO
    } else {
        radicand.sqrt()
    };
    let nu_sq_minus = (delta - root) * 0.5;
    let nu_sq_plus = (delta + root) * 0.5;
    TwoModeSpectrum {
        det_a,
        det_b,
        det_ab,
        delta,
        det_sigma,
        radicand,
        nu_sq_minus,
        nu_sq_plus,
    }
}

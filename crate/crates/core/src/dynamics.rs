// Copyright 2026 cvent Contributors
// SPDX-License-Identifier: Apache-2.0

//! Closed and open evolution of the covariance matrix.
//!
//! Closed dynamics is the symplectic map `σ → S σ Sᵀ` with `S = exp(Ω H̃ τ)`.
//! Open dynamics adds uniform damping and thermal diffusion:
//!
//! ```text
//! dσ/dτ = A σ + σ Aᵀ + D,   A = Ω H̃ − (κ̃/2) I,   D = (2 N_th + 1) κ̃ I
//! ```
//!
//! `A` is constant for every Hamiltonian handled here, so when it is
//! Hurwitz the solution has the closed form
//! `σ(τ) = e^{Aτ} (σ₀ − σ∞) e^{Aᵀτ} + σ∞`.

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use crate::cv::{require_physical, symplectic_form, CovarianceMatrix, Mat4, QuadraticHamiltonian};
use crate::error::{CoreError, Result};
use crate::expm::expm;
use crate::potentials::{check_stability, Stability};

/// Couplings beyond this magnitude are rejected by the propagator.
pub const MAX_COUPLING: f64 = 1e6;

/// Step of the RK4 fallback used when the drift is not Hurwitz.
pub const RK4_STEP: f64 = 1e-3;

const RK4_MAX_STEPS: f64 = 1e9;

/// Margin on `max Re λ(A) < 0` for treating the drift as Hurwitz.
pub const HURWITZ_TOL: f64 = 1e-12;

/// Markovian noise: damping rate `κ̃ = κ/ω_m` and thermal occupation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNoise")]
pub struct NoiseModel {
    kappa_tilde: f64,
    n_th: f64,
}

#[derive(Deserialize)]
struct RawNoise {
    kappa_tilde: f64,
    n_th: f64,
}

impl TryFrom<RawNoise> for NoiseModel {
    type Error = CoreError;
    fn try_from(raw: RawNoise) -> Result<Self> {
        NoiseModel::new(raw.kappa_tilde, raw.n_th)
    }
}

impl NoiseModel {
    pub const NOISELESS: NoiseModel = NoiseModel {
        kappa_tilde: 0.0,
        n_th: 0.0,
    };

    pub fn new(kappa_tilde: f64, n_th: f64) -> Result<Self> {
        if !(kappa_tilde.is_finite() && kappa_tilde >= 0.0) {
            return Err(CoreError::param(
                "kappa_tilde",
                format!("must be finite and >= 0, got {kappa_tilde}"),
            ));
        }
        if !(n_th.is_finite() && n_th >= 0.0) {
            return Err(CoreError::param("n_th", format!("must be finite and >= 0, got {n_th}")));
        }
        Ok(NoiseModel { kappa_tilde, n_th })
    }

    pub fn kappa_tilde(&self) -> f64 {
        self.kappa_tilde
    }

    pub fn n_th(&self) -> f64 {
        self.n_th
    }

    /// `2 N_th + 1`, the thermal scale of every steady-state moment.
    pub fn thermal_factor(&self) -> f64 {
        2.0 * self.n_th + 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftDiffusion {
    pub a: Mat4,
    pub d: Mat4,
}

impl DriftDiffusion {
    pub fn new(h: &QuadraticHamiltonian, noise: &NoiseModel) -> Self {
        let k = noise.kappa_tilde();
        DriftDiffusion {
            a: symplectic_form() * h.matrix() - Mat4::identity() * (0.5 * k),
            d: Mat4::identity() * (noise.thermal_factor() * k),
        }
    }

    /// Largest real part over the eigenvalues of the drift.
    pub fn spectral_abscissa(&self) -> f64 {
        self.a
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_hurwitz(&self) -> bool {
        self.spectral_abscissa() < -HURWITZ_TOL
    }

    /// `‖Aσ + σAᵀ + D‖_F`.
    pub fn lyapunov_residual(&self, sigma: &Mat4) -> f64 {
        (self.a * sigma + sigma * self.a.transpose() + self.d).norm()
    }

    fn rhs(&self, sigma: &Mat4) -> Mat4 {
        self.a * sigma + sigma * self.a.transpose() + self.d
    }
}

/// `S = exp(Ω H̃ τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticPropagator {
    s: Mat4,
    tau: f64,
}

impl SymplecticPropagator {
    pub fn matrix(&self) -> &Mat4 {
        &self.s
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `‖S Ω Sᵀ − Ω‖_F`.
    pub fn symplectic_defect(&self) -> f64 {
        let om = symplectic_form();
        (self.s * om * self.s.transpose() - om).norm()
    }

    pub fn apply(&self, sigma: &CovarianceMatrix) -> CovarianceMatrix {
        CovarianceMatrix::symmetrized(&(self.s * sigma.matrix() * self.s.transpose()))
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() && tau >= 0.0 {
        Ok(())
    } else {
        Err(CoreError::param("tau", format!("must be finite and >= 0, got {tau}")))
    }
}

pub fn propagator(h: &QuadraticHamiltonian, tau: f64) -> Result<SymplecticPropagator> {
    check_tau(tau)?;
    if h.alpha_tilde().abs() > MAX_COUPLING {
        return Err(CoreError::Numeric(format!(
            "|alpha_tilde| = {:e} exceeds the supported range {MAX_COUPLING:e}",
            h.alpha_tilde().abs()
        )));
    }
    let s = expm(&(symplectic_form() * h.matrix() * tau))?;
    Ok(SymplecticPropagator { s, tau })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvolveOptions {
    /// Permit `α̃ < −1/2`, where the trap is unbounded and motion grows.
    pub allow_unstable: bool,
}

fn check_evolution_stability(h: &QuadraticHamiltonian, opts: &EvolveOptions) -> Result<()> {
    if check_stability(h.alpha_tilde()) == Stability::Unstable && !opts.allow_unstable {
        return Err(CoreError::Unstable {
            alpha_tilde: h.alpha_tilde(),
        });
    }
    Ok(())
}

pub fn evolve_closed(sigma0: &CovarianceMatrix, h: &QuadraticHamiltonian, tau: f64) -> Result<CovarianceMatrix> {
    evolve_closed_with(sigma0, h, tau, &EvolveOptions::default())
}

pub fn evolve_closed_with(
    sigma0: &CovarianceMatrix,
    h: &QuadraticHamiltonian,
    tau: f64,
    opts: &EvolveOptions,
) -> Result<CovarianceMatrix> {
    require_physical(sigma0)?;
    check_evolution_stability(h, opts)?;
    Ok(propagator(h, tau)?.apply(sigma0))
}

pub fn evolve_open(
    sigma0: &CovarianceMatrix,
    h: &QuadraticHamiltonian,
    noise: &NoiseModel,
    tau: f64,
) -> Result<CovarianceMatrix> {
    evolve_open_with(sigma0, h, noise, tau, &EvolveOptions::default())
}

pub fn evolve_open_with(
    sigma0: &CovarianceMatrix,
    h: &QuadraticHamiltonian,
    noise: &NoiseModel,
    tau: f64,
    opts: &EvolveOptions,
) -> Result<CovarianceMatrix> {
    require_physical(sigma0)?;
    check_tau(tau)?;
    check_evolution_stability(h, opts)?;
    if noise.kappa_tilde() == 0.0 {
        return Ok(propagator(h, tau)?.apply(sigma0));
    }
    let dd = DriftDiffusion::new(h, noise);
    if dd.is_hurwitz() {
        let sigma_inf = solve_lyapunov(&dd)?;
        Ok(relax_towards(&dd, sigma0.matrix(), &sigma_inf, tau)?)
    } else {
        rk4(&dd, sigma0.matrix(), tau)
    }
}

fn relax_towards(dd: &DriftDiffusion, sigma0: &Mat4, sigma_inf: &Mat4, tau: f64) -> Result<CovarianceMatrix> {
    let e = expm(&(dd.a * tau))?;
    let out = e * (sigma0 - sigma_inf) * e.transpose() + sigma_inf;
    Ok(CovarianceMatrix::symmetrized(&out))
}

fn rk4(dd: &DriftDiffusion, sigma0: &Mat4, tau: f64) -> Result<CovarianceMatrix> {
    let steps = (tau / RK4_STEP).ceil();
    if steps > RK4_MAX_STEPS {
        return Err(CoreError::Numeric(format!(
            "tau = {tau} needs {steps:e} integrator steps of {RK4_STEP}"
        )));
    }
    let steps = steps as u64;
    if steps == 0 {
        return Ok(CovarianceMatrix::symmetrized(sigma0));
    }
    let dt = tau / steps as f64;
    let mut s = *sigma0;
    for _ in 0..steps {
        let k1 = dd.rhs(&s);
        let k2 = dd.rhs(&(s + k1 * (0.5 * dt)));
        let k3 = dd.rhs(&(s + k2 * (0.5 * dt)));
        let k4 = dd.rhs(&(s + k3 * dt));
        s += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        s = (s + s.transpose()) * 0.5;
    }
    if !s.iter().all(|v| v.is_finite()) {
        return Err(CoreError::Numeric("integrator diverged".into()));
    }
    Ok(CovarianceMatrix::symmetrized(&s))
}

/// Solves `Aσ + σAᵀ + D = 0` as the 16-unknown system
/// `(I ⊗ A + A ⊗ I) vec σ = −vec D` (column-major `vec`).
fn solve_lyapunov(dd: &DriftDiffusion) -> Result<Mat4> {
    let ident = Mat4::identity();
    let k: SMatrix<f64, 16, 16> = ident.kronecker(&dd.a) + dd.a.kronecker(&ident);
    let rhs = SMatrix::<f64, 16, 1>::from_column_slice((-dd.d).as_slice());
    let x = k
        .lu()
        .solve(&rhs)
        .ok_or_else(|| CoreError::NoSteadyState("Kronecker-sum system is singular".into()))?;
    let sigma = Mat4::from_column_slice(x.as_slice());
    Ok((sigma + sigma.transpose()) * 0.5)
}

/// Stationary covariance of the open dynamics, by direct linear solve.
pub fn steady_state_numeric(h: &QuadraticHamiltonian, noise: &NoiseModel) -> Result<CovarianceMatrix> {
    if noise.kappa_tilde() <= 0.0 {
        return Err(CoreError::NoSteadyState(
            "undamped dynamics (kappa_tilde = 0) has no attracting steady state".into(),
        ));
    }
    if check_stability(h.alpha_tilde()) == Stability::Unstable {
        return Err(CoreError::Unstable {
            alpha_tilde: h.alpha_tilde(),
        });
    }
    let dd = DriftDiffusion::new(h, noise);
    if !dd.is_hurwitz() {
        return Err(CoreError::NoSteadyState(format!(
            "drift is not Hurwitz (spectral abscissa {:e})",
            dd.spectral_abscissa()
        )));
    }
    Ok(CovarianceMatrix::symmetrized(&solve_lyapunov(&dd)?))
}

/// Evolves `sigma0` to every time in `taus`, in the given order.
pub fn trajectory(
    sigma0: &CovarianceMatrix,
    h: &QuadraticHamiltonian,
    noise: &NoiseModel,
    taus: &[f64],
    opts: &EvolveOptions,
) -> Result<Vec<(f64, CovarianceMatrix)>> {
    taus.iter()
        .map(|&tau| evolve_open_with(sigma0, h, noise, tau, opts).map(|s| (tau, s)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cv::{make_hamiltonian, squeezed_state, SqueezingParameter};
    use std::f64::consts::PI;

    fn taylor_exp(a: &Mat4, terms: usize) -> Mat4 {
        let mut sum = Mat4::identity();
        let mut term = Mat4::identity();
        for k in 1..terms {
            term = term * a / k as f64;
            sum += term;
        }
        sum
    }

    #[test]
    fn propagator_at_zero_time_is_identity() {
        for alpha in [-0.49, -0.4, 0.0, 0.7] {
            let s = propagator(&make_hamiltonian(alpha).unwrap(), 0.0).unwrap();
            assert_eq!(*s.matrix(), Mat4::identity());
        }
    }

    #[test]
    fn free_quarter_period_is_rotation() {
        let s = propagator(&make_hamiltonian(0.0).unwrap(), PI / 2.0).unwrap();
        // exp(Ω π/2) = cos(π/2) I + sin(π/2) Ω: a quarter turn of each mode
        assert!((s.matrix() - symplectic_form()).norm() < 1e-14);
    }

    #[test]
    fn propagator_matches_truncated_series() {
        let h = make_hamiltonian(-0.4).unwrap();
        let s = propagator(&h, 1.0).unwrap();
        assert!(s.symplectic_defect() < 1e-10);
        let oracle = taylor_exp(&(symplectic_form() * h.matrix()), 16);
        assert!((s.matrix() - oracle).norm() < 1e-9);
    }

    #[test]
    fn propagator_rejects_bad_inputs() {
        let h = make_hamiltonian(0.1).unwrap();
        assert!(propagator(&h, -1.0).is_err());
        assert!(propagator(&h, f64::NAN).is_err());
        let huge = make_hamiltonian(2e6).unwrap();
        assert!(matches!(propagator(&huge, 1.0), Err(CoreError::Numeric(_))));
    }

    #[test]
    fn free_evolution_is_periodic() {
        let h = make_hamiltonian(0.0).unwrap();
        let s0 = squeezed_state(SqueezingParameter::new(3.0).unwrap());
        let s = evolve_closed(&s0, &h, 2.0 * PI).unwrap();
        assert!((s.matrix() - s0.matrix()).norm() < 1e-12);
    }

    #[test]
    fn unstable_requires_override() {
        let h = make_hamiltonian(-0.7).unwrap();
        let s0 = CovarianceMatrix::identity();
        assert!(matches!(evolve_closed(&s0, &h, 1.0), Err(CoreError::Unstable { .. })));
        let opts = EvolveOptions { allow_unstable: true };
        let s = evolve_closed_with(&s0, &h, 1.0, &opts).unwrap();
        assert!((s.determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unphysical_initial_state_rejected() {
        let bad = CovarianceMatrix::new(Mat4::identity() * 0.5).unwrap();
        let h = make_hamiltonian(0.0).unwrap();
        assert!(matches!(evolve_closed(&bad, &h, 1.0), Err(CoreError::Unphysical(_))));
    }

    #[test]
    fn noiseless_open_equals_closed() {
        let h = make_hamiltonian(-0.4).unwrap();
        let s0 = squeezed_state(SqueezingParameter::new(2.0).unwrap());
        for tau in [0.0, 0.3, 4.0, 17.0] {
            let a = evolve_open(&s0, &h, &NoiseModel::NOISELESS, tau).unwrap();
            let b = evolve_closed(&s0, &h, tau).unwrap();
            assert!((a.matrix() - b.matrix()).norm() < 1e-9);
        }
    }

    #[test]
    fn vacuum_is_fixed_under_pure_damping() {
        let h = make_hamiltonian(0.0).unwrap();
        for kappa in [0.01, 1.0, 10.0] {
            let noise = NoiseModel::new(kappa, 0.0).unwrap();
            for tau in [0.5, 5.0, 50.0] {
                let s = evolve_open(&CovarianceMatrix::identity(), &h, &noise, tau).unwrap();
                assert!((s.matrix() - Mat4::identity()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn steady_state_examples() {
        let free = make_hamiltonian(0.0).unwrap();
        let s = steady_state_numeric(&free, &NoiseModel::new(0.7, 0.0).unwrap()).unwrap();
        assert!((s.matrix() - Mat4::identity()).norm() < 1e-12);
        let s = steady_state_numeric(&free, &NoiseModel::new(0.7, 5.0).unwrap()).unwrap();
        assert!((s.matrix() - Mat4::identity() * 11.0).norm() < 1e-11);
    }

    #[test]
    fn steady_state_errors() {
        let h = make_hamiltonian(-0.4).unwrap();
        assert!(matches!(
            steady_state_numeric(&h, &NoiseModel::NOISELESS),
            Err(CoreError::NoSteadyState(_))
        ));
        let bad = make_hamiltonian(-0.8).unwrap();
        assert!(matches!(
            steady_state_numeric(&bad, &NoiseModel::new(1.0, 0.0).unwrap()),
            Err(CoreError::Unstable { .. })
        ));
    }

    #[test]
    fn steady_state_residual_is_small() {
        for alpha in [-0.49, -0.4, 0.0, 0.3] {
            for kappa in [0.05, 1.0, 5.0] {
                let h = make_hamiltonian(alpha).unwrap();
                let noise = NoiseModel::new(kappa, 0.3).unwrap();
                let s = steady_state_numeric(&h, &noise).unwrap();
                let dd = DriftDiffusion::new(&h, &noise);
                assert!(dd.lyapunov_residual(s.matrix()) <= 1e-10 * dd.d.norm());
            }
        }
    }

    #[test]
    fn marginal_coupling_still_relaxes_with_damping() {
        let h = make_hamiltonian(-0.5).unwrap();
        let noise = NoiseModel::new(0.5, 0.0).unwrap();
        let dd = DriftDiffusion::new(&h, &noise);
        assert!(dd.is_hurwitz());
        assert!(steady_state_numeric(&h, &noise).is_ok());
    }

    #[test]
    fn rk4_fallback_agrees_with_exact_solution() {
        // unstable coupling with weak damping: drift not Hurwitz, so RK4
        let h = make_hamiltonian(-0.6).unwrap();
        let noise = NoiseModel::new(0.2, 0.1).unwrap();
        let dd = DriftDiffusion::new(&h, &noise);
        assert!(!dd.is_hurwitz());
        let opts = EvolveOptions { allow_unstable: true };
        let s0 = CovarianceMatrix::identity();
        let tau = 2.0;
        let s = evolve_open_with(&s0, &h, &noise, tau, &opts).unwrap();
        // oracle: vectorized linear ODE, solved with one 16×16 exponential
        // applied to the augmented system [vec σ; 1]
        let ident = Mat4::identity();
        let k: SMatrix<f64, 16, 16> = ident.kronecker(&dd.a) + dd.a.kronecker(&ident);
        let mut aug = SMatrix::<f64, 17, 17>::zeros();
        aug.fixed_view_mut::<16, 16>(0, 0).copy_from(&k);
        for (i, v) in dd.d.as_slice().iter().enumerate() {
            aug[(i, 16)] = *v;
        }
        let mut series = SMatrix::<f64, 17, 17>::identity();
        let mut term = series;
        let m = aug * (tau / 64.0);
        for j in 1..30 {
            term = term * m / j as f64;
            series += term;
        }
        for _ in 0..6 {
            series = series * series;
        }
        let mut x0 = SMatrix::<f64, 17, 1>::zeros();
        x0.fixed_view_mut::<16, 1>(0, 0).copy_from_slice(s0.matrix().as_slice());
        x0[16] = 1.0;
        let x = series * x0;
        let oracle = Mat4::from_column_slice(&x.as_slice()[..16]);
        assert!((s.matrix() - oracle).norm() < 1e-9 * oracle.norm());
    }

    #[test]
    fn trajectory_preserves_order() {
        let h = make_hamiltonian(-0.2).unwrap();
        let noise = NoiseModel::new(0.1, 0.0).unwrap();
        let taus = [3.0, 0.0, 1.5];
        let traj = trajectory(
            &CovarianceMatrix::identity(),
            &h,
            &noise,
            &taus,
            &EvolveOptions::default(),
        )
        .unwrap();
        assert_eq!(traj.iter().map(|(t, _)| *t).collect::<Vec<_>>(), taus);
        assert_eq!(*traj[1].1.matrix(), Mat4::identity());
    }

    #[test]
    fn noise_model_validation() {
        assert!(NoiseModel::new(-1.0, 0.0).is_err());
        assert!(NoiseModel::new(1.0, -0.1).is_err());
        assert!(NoiseModel::new(f64::INFINITY, 0.0).is_err());
        assert_eq!(NoiseModel::new(1.0, 2.0).unwrap().thermal_factor(), 5.0);
    }
}

// Copyright 2026 cvent Contributors
// SPDX-License-Identifier: Apache-2.0

//! How precisely must the covariance entries be measured to certify the
//! stationary entanglement?
//!
//! Each independent entry `σ_k` is read with a relative error `ε_k`, i.e.
//! `σ_k → σ_k (1 + ε_k)` with `σ_ji` tied to `σ_ij`. Linear propagation
//! gives
//!
//! ```text
//! δE_N = sqrt( Σ_k (∂E_N/∂ε_k · ε_k)² )
//! ```
//!
//! The partials are central finite differences of the exact `E_N`,
//! checked against a ten times smaller step and Richardson-combined.
//! A global rescaling `σ → (1+ε)σ` rescales `ν̃₋` by `(1+ε)`, so on any
//! entangled state the ten partials sum to `−1/ln 2`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cv::{check_physicality, CovarianceMatrix, Physicality};
use crate::dynamics::NoiseModel;
use crate::entanglement::log_negativity;
use crate::error::{CoreError, Result};
use crate::potentials::{check_stability, Stability};
use crate::steady::SteadyStateSolver;

/// An independent covariance entry, 0-based, upper triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element {
    pub row: usize,
    pub col: usize,
}

impl Element {
    const fn new(row: usize, col: usize) -> Self {
        Element { row, col }
    }

    /// 1-based label such as `"13"`.
    pub fn label(&self) -> String {
        format!("{}{}", self.row + 1, self.col + 1)
    }

    pub fn from_label(label: &str) -> Option<Element> {
        ELEMENTS.iter().copied().find(|e| e.label() == label)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.row + 1, self.col + 1)
    }
}

/// `k ∈ {11, 12, 13, 14, 22, 23, 24, 33, 34, 44}`.
pub const ELEMENTS: [Element; 10] = [
    Element::new(0, 0),
    Element::new(0, 1),
    Element::new(0, 2),
    Element::new(0, 3),
    Element::new(1, 1),
    Element::new(1, 2),
    Element::new(1, 3),
    Element::new(2, 2),
    Element::new(2, 3),
    Element::new(3, 3),
];

/// Step control for the finite-difference partials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDifference {
    /// First relative step tried.
    pub step: f64,
    /// The check step is `step / refine`.
    pub refine: f64,
    /// Required relative agreement between the two steps.
    pub rel_tol: f64,
    /// Absolute slack for partials that are zero up to rounding.
    pub abs_floor: f64,
    /// Give up once the step drops below this.
    pub min_step: f64,
}

impl Default for FiniteDifference {
    fn default() -> Self {
        FiniteDifference {
            step: 1e-6,
            refine: 10.0,
            rel_tol: 1e-4,
            abs_floor: 1e-9,
            min_step: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Partials {
    values: [f64; 10],
}

impl Partials {
    pub fn get(&self, element: Element) -> f64 {
        let i = ELEMENTS
            .iter()
            .position(|e| *e == element)
            .expect("independent element");
        self.values[i]
    }

    pub fn values(&self) -> &[f64; 10] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (Element, f64)> + '_ {
        ELEMENTS.iter().copied().zip(self.values.iter().copied())
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

fn perturbed(sigma: &CovarianceMatrix, element: Element, eps: f64) -> CovarianceMatrix {
    let mut m = *sigma.matrix();
    let v = m[(element.row, element.col)] * (1.0 + eps);
    m[(element.row, element.col)] = v;
    m[(element.col, element.row)] = v;
    CovarianceMatrix::new(m).expect("symmetric perturbation of a symmetric matrix")
}

/// `E_N` at a perturbed point, or `None` if the step left the smooth,
/// physical, entangled region.
fn smooth_e_n(sigma: &CovarianceMatrix) -> Option<f64> {
    match check_physicality(sigma.matrix()) {
        Ok(Physicality::Physical) => {}
        _ => return None,
    }
    match log_negativity(sigma) {
        Ok(rep) if rep.entangled => Some(rep.e_n),
        _ => None,
    }
}

fn central(sigma: &CovarianceMatrix, element: Element, h: f64) -> Option<f64> {
    let up = smooth_e_n(&perturbed(sigma, element, h))?;
    let down = smooth_e_n(&perturbed(sigma, element, -h))?;
    Some((up - down) / (2.0 * h))
}

fn partial(sigma: &CovarianceMatrix, element: Element, fd: &FiniteDifference) -> Result<f64> {
    if sigma.get(element.row, element.col) == 0.0 {
        return Ok(0.0);
    }
    let mut h = fd.step;
    while h >= fd.min_step {
        let fine = h / fd.refine;
        if let (Some(coarse_p), Some(fine_p)) = (central(sigma, element, h), central(sigma, element, fine)) {
            let scale = coarse_p.abs().max(fine_p.abs());
            if (coarse_p - fine_p).abs() <= fd.rel_tol * scale + fd.abs_floor {
                // O(h²) error: eliminate the leading term
                let r2 = fd.refine * fd.refine;
                return Ok(fine_p + (fine_p - coarse_p) / (r2 - 1.0));
            }
        }
        h = fine;
    }
    Err(CoreError::Numeric(format!(
        "no stable finite-difference step for element {element} down to {:e}",
        fd.min_step
    )))
}

/// `∂E_N/∂ε_k` for the ten independent entries, at `ε = 0`.
pub fn partials(sigma: &CovarianceMatrix) -> Result<Partials> {
    partials_with(sigma, &FiniteDifference::default())
}

pub fn partials_with(sigma: &CovarianceMatrix, fd: &FiniteDifference) -> Result<Partials> {
    let rep = log_negativity(sigma)?;
    if !rep.entangled {
        return Err(CoreError::NonDifferentiable(format!(
            "E_N = 0 (nu_minus = {}) sits on the max(0, .) kink",
            rep.nu_minus
        )));
    }
    let mut values = [0.0; 10];
    for (slot, element) in values.iter_mut().zip(ELEMENTS) {
        *slot = partial(sigma, element, fd)?;
    }
    Ok(Partials { values })
}

/// Relative measurement precision: a common `epsilon`, optionally
/// overridden per element by label (`"11"`, `"24"`, ...).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorSpec {
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_element: BTreeMap<String, f64>,
}

impl ErrorSpec {
    pub fn uniform(epsilon: f64) -> Self {
        ErrorSpec {
            epsilon,
            per_element: BTreeMap::new(),
        }
    }

    pub fn epsilons(&self) -> Result<[f64; 10]> {
        let check = |v: f64| -> Result<f64> {
            if v.is_finite() && v >= 0.0 {
                Ok(v)
            } else {
                Err(CoreError::param("epsilon", format!("must be finite and >= 0, got {v}")))
            }
        };
        let mut out = [check(self.epsilon)?; 10];
        for (label, &v) in &self.per_element {
            let element = Element::from_label(label).ok_or_else(|| {
                CoreError::param(
                    "per_element",
                    format!("`{label}` is not an independent element (use 11, 12, 13, 14, 22, 23, 24, 33, 34, 44)"),
                )
            })?;
            let i = ELEMENTS.iter().position(|e| *e == element).expect("listed element");
            out[i] = check(v)?;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBudget {
    pub e_n: f64,
    pub epsilons: [f64; 10],
    pub partials: Partials,
    pub delta_e_n: f64,
    pub relative_error: f64,
}

/// Combines precomputed partials with a precision spec.
pub fn budget_from_partials(e_n: f64, partials: &Partials, spec: &ErrorSpec) -> Result<ErrorBudget> {
    let epsilons = spec.epsilons()?;
    let delta_e_n = partials
        .values
        .iter()
        .zip(epsilons)
        .map(|(p, e)| (p * e).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(ErrorBudget {
        e_n,
        epsilons,
        partials: *partials,
        delta_e_n,
        relative_error: delta_e_n / e_n,
    })
}

pub fn propagate_error(sigma: &CovarianceMatrix, spec: &ErrorSpec) -> Result<ErrorBudget> {
    let partials = partials(sigma)?;
    let e_n = log_negativity(sigma)?.e_n;
    budget_from_partials(e_n, &partials, spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellFlag {
    Ok,
    /// Relative error above one: the entanglement is not certifiable.
    ExceedsUnity,
    /// `E_N = 0`; nothing to certify.
    Separable,
    Unstable,
    Failed,
}

impl CellFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellFlag::Ok => "ok",
            CellFlag::ExceedsUnity => "exceeds_unity",
            CellFlag::Separable => "separable",
            CellFlag::Unstable => "unstable",
            CellFlag::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrecisionCell {
    pub alpha_tilde: f64,
    pub epsilon: f64,
    pub e_n: Option<f64>,
    pub delta_e_n: Option<f64>,
    pub relative_error: Option<f64>,
    pub flag: CellFlag,
}

/// One coupling's worth of the precision map: partials are computed once
/// and reused across every `epsilon`.
pub fn precision_row(
    alpha_tilde: f64,
    epsilons: &[f64],
    noise: &NoiseModel,
    solver: &dyn SteadyStateSolver,
) -> Vec<PrecisionCell> {
    let blank = |epsilon: f64, e_n: Option<f64>, flag: CellFlag| PrecisionCell {
        alpha_tilde,
        epsilon,
        e_n,
        delta_e_n: None,
        relative_error: None,
        flag,
    };
    if check_stability(alpha_tilde) == Stability::Unstable {
        return epsilons.iter().map(|&e| blank(e, None, CellFlag::Unstable)).collect();
    }
    let sigma = match solver.solve(alpha_tilde, noise) {
        Ok(s) => s,
        Err(_) => return epsilons.iter().map(|&e| blank(e, None, CellFlag::Failed)).collect(),
    };
    let e_n = match log_negativity(&sigma) {
        Ok(rep) if rep.entangled => rep.e_n,
        Ok(rep) => {
            return epsilons
                .iter()
                .map(|&e| blank(e, Some(rep.e_n), CellFlag::Separable))
                .collect()
        }
        Err(_) => return epsilons.iter().map(|&e| blank(e, None, CellFlag::Failed)).collect(),
    };
    let parts = match partials(&sigma) {
        Ok(p) => p,
        Err(_) => {
            return epsilons
                .iter()
                .map(|&e| blank(e, Some(e_n), CellFlag::Failed))
                .collect()
        }
    };
    epsilons
        .iter()
        .map(
            |&epsilon| match budget_from_partials(e_n, &parts, &ErrorSpec::uniform(epsilon)) {
                Ok(b) => PrecisionCell {
                    alpha_tilde,
                    epsilon,
                    e_n: Some(e_n),
                    delta_e_n: Some(b.delta_e_n),
                    relative_error: Some(b.relative_error),
                    flag: if b.relative_error > 1.0 {
                        CellFlag::ExceedsUnity
                    } else {
                        CellFlag::Ok
                    },
                },
                Err(_) => blank(epsilon, Some(e_n), CellFlag::Failed),
            },
        )
        .collect()
}

/// Relative error over a coupling × precision grid, coupling-major.
pub fn precision_map(
    alphas: &[f64],
    epsilons: &[f64],
    noise: &NoiseModel,
    solver: &dyn SteadyStateSolver,
) -> Vec<PrecisionCell> {
    alphas
        .iter()
        .flat_map(|&a| precision_row(a, epsilons, noise, solver))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cv::{squeezed_state, SqueezingParameter};
    use crate::entanglement::steady_state_closed_form;
    use crate::steady::ClosedForm;
    use std::f64::consts::LN_2;

    fn steady(alpha: f64, kappa: f64, n_th: f64) -> CovarianceMatrix {
        steady_state_closed_form(alpha, &NoiseModel::new(kappa, n_th).unwrap()).unwrap()
    }

    #[test]
    fn labels_round_trip() {
        let labels: Vec<_> = ELEMENTS.iter().map(Element::label).collect();
        assert_eq!(labels, ["11", "12", "13", "14", "22", "23", "24", "33", "34", "44"]);
        for e in ELEMENTS {
            assert_eq!(Element::from_label(&e.label()), Some(e));
        }
        assert_eq!(Element::from_label("21"), None);
    }

    #[test]
    fn global_scaling_identity() {
        let p = partials(&steady(-0.4, 1.0, 0.0)).unwrap();
        assert!((p.sum() + 1.0 / LN_2).abs() < 1e-4, "sum = {}", p.sum());
    }

    #[test]
    fn separable_state_is_not_differentiable() {
        let s = squeezed_state(SqueezingParameter::new(3.0).unwrap());
        assert!(matches!(partials(&s), Err(CoreError::NonDifferentiable(_))));
    }

    #[test]
    fn zero_precision_gives_zero_error() {
        let b = propagate_error(&steady(-0.3, 1.0, 0.0), &ErrorSpec::uniform(0.0)).unwrap();
        assert_eq!(b.delta_e_n, 0.0);
        assert_eq!(b.relative_error, 0.0);
    }

    #[test]
    fn error_is_homogeneous_in_precision() {
        let s = steady(-0.25, 0.7, 0.02);
        let base = propagate_error(&s, &ErrorSpec::uniform(1e-3)).unwrap();
        for c in [0.5, 3.0, 10.0] {
            let scaled = propagate_error(&s, &ErrorSpec::uniform(c * 1e-3)).unwrap();
            assert!((scaled.delta_e_n - c * base.delta_e_n).abs() <= 1e-12 * scaled.delta_e_n);
        }
    }

    #[test]
    fn per_element_overrides() {
        let s = steady(-0.4, 1.0, 0.0);
        let mut spec = ErrorSpec::uniform(0.0);
        spec.per_element.insert("11".into(), 0.01);
        let b = propagate_error(&s, &spec).unwrap();
        let expected = (b.partials.get(ELEMENTS[0]) * 0.01).abs();
        assert!((b.delta_e_n - expected).abs() < 1e-15);
        spec.per_element.insert("31".into(), 0.01);
        assert!(propagate_error(&s, &spec).is_err());
        assert!(propagate_error(&s, &ErrorSpec::uniform(-1.0)).is_err());
    }

    #[test]
    fn halving_the_step_is_stable() {
        let s = steady(-0.35, 0.5, 0.01);
        let base = partials(&s).unwrap();
        let fd = FiniteDifference {
            step: 5e-7,
            ..FiniteDifference::default()
        };
        let halved = partials_with(&s, &fd).unwrap();
        for ((_, a), (_, b)) in base.iter().zip(halved.iter()) {
            assert!((a - b).abs() <= 1e-4 * a.abs().max(b.abs()) + 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn weak_coupling_partials_resolved() {
        // E_N ≈ 4.5e-8: the default step would cross the kink
        let p = partials(&steady(-6.67e-8, 0.1, 1e-9)).unwrap();
        assert!((p.sum() + 1.0 / LN_2).abs() < 1e-4, "sum = {}", p.sum());
        for d in [ELEMENTS[0], ELEMENTS[4], ELEMENTS[7], ELEMENTS[9]] {
            assert!((p.get(d) + 0.25 / LN_2).abs() < 1e-4);
        }
    }

    #[test]
    fn precision_map_flags() {
        let noise = NoiseModel::new(1.0, 0.0).unwrap();
        let alphas = [-0.3, -0.01, 0.0, 0.3, -0.7];
        let eps = [0.0, 0.05];
        let grid = precision_map(&alphas, &eps, &noise, &ClosedForm);
        assert_eq!(grid.len(), alphas.len() * eps.len());
        let at = |a: f64, e: f64| *grid.iter().find(|c| c.alpha_tilde == a && c.epsilon == e).unwrap();
        assert_eq!(at(-0.3, 0.0).relative_error, Some(0.0));
        assert_eq!(at(-0.3, 0.0).flag, CellFlag::Ok);
        assert_eq!(at(-0.01, 0.05).flag, CellFlag::ExceedsUnity);
        assert_eq!(at(0.0, 0.05).flag, CellFlag::Separable);
        assert_eq!(at(-0.7, 0.05).flag, CellFlag::Unstable);
        let attractive = at(-0.3, 0.05).relative_error.unwrap();
        let repulsive = at(0.3, 0.05).relative_error.unwrap();
        assert!(attractive < repulsive);
    }
}

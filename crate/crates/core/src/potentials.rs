// Copyright 2026 cvent Contributors
// SPDX-License-Identifier: Apache-2.0

//! Central potentials `α / rⁿ` and the dimensionless coupling α̃ they
//! induce between the two trapped oscillators.
//!
//! Two formulas coexist. The generic one keeps the `n(n+1)` factor from the
//! second-order expansion; the Coulomb and Newtonian specializations follow
//! the published table conventions, which drop it. At `n = 1` they differ
//! by exactly a factor of 2. The specialized forms are the ones used to
//! reproduce the tabulated couplings.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::registry::Registry;

/// CODATA 2018 values, SI units.
pub mod constants {
    /// Vacuum permittivity, F/m.
    pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
    /// Newtonian constant of gravitation, m³ kg⁻¹ s⁻².
    pub const G: f64 = 6.674_30e-11;
    /// Elementary charge, C (exact).
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub epsilon_0: f64,
    pub g: f64,
    pub e: f64,
}

impl PhysicalConstants {
    pub const CODATA: PhysicalConstants = PhysicalConstants {
        epsilon_0: constants::EPSILON_0,
        g: constants::G,
        e: constants::ELEMENTARY_CHARGE,
    };
}

/// Physical description of a two-body central potential, SI units.
///
/// `kind` names a registered [`CouplingModel`]. Which of `alpha`, `q1`,
/// `q2` are needed depends on the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: String,
    #[serde(default = "default_power")]
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q2: Option<f64>,
    /// Oscillator mass, kg.
    pub m: f64,
    /// Mechanical angular frequency, rad/s.
    pub omega_m: f64,
    /// Equilibrium separation, m.
    pub r: f64,
}

fn default_power() -> u32 {
    1
}

impl PotentialSpec {
    pub fn generic(n: u32, alpha: f64, m: f64, omega_m: f64, r: f64) -> Self {
        PotentialSpec {
            kind: "generic".into(),
            n,
            alpha: Some(alpha),
            q1: None,
            q2: None,
            m,
            omega_m,
            r,
        }
    }

    pub fn coulomb(q1: f64, q2: f64, m: f64, omega_m: f64, r: f64) -> Self {
        PotentialSpec {
            kind: "coulomb".into(),
            n: 1,
            alpha: None,
            q1: Some(q1),
            q2: Some(q2),
            m,
            omega_m,
            r,
        }
    }

    pub fn newtonian(m: f64, omega_m: f64, r: f64) -> Self {
        PotentialSpec {
            kind: "newtonian".into(),
            n: 1,
            alpha: None,
            q1: None,
            q2: None,
            m,
            omega_m,
            r,
        }
    }

    /// Checks the shared invariants `m, ω_m, r > 0` and `n ≥ 1`.
    pub fn validate(&self) -> Result<()> {
        positive("m", self.m)?;
        positive("omega_m", self.omega_m)?;
        positive("r", self.r)?;
        if self.n < 1 {
            return Err(CoreError::param("n", "power must be >= 1"));
        }
        Ok(())
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CoreError::param(name, format!("must be finite and > 0, got {v}")))
    }
}

fn required(name: &'static str, v: Option<f64>) -> Result<f64> {
    match v {
        Some(x) if x.is_finite() => Ok(x),
        Some(x) => Err(CoreError::param(name, format!("must be finite, got {x}"))),
        None => Err(CoreError::param(name, "required for this potential kind")),
    }
}

/// Coefficients of `1/(r − Δx)ⁿ ≈ c0 + c1 Δx + c2 Δx²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorCoefficients {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl TaylorCoefficients {
    pub fn eval(&self, dx: f64) -> f64 {
        self.c0 + dx * (self.c1 + dx * self.c2)
    }
}

pub fn taylor_expand(n: u32, r: f64) -> Result<TaylorCoefficients> {
    positive("r", r)?;
    if n < 1 {
        return Err(CoreError::param("n", "power must be >= 1"));
    }
    let nf = f64::from(n);
    let c0 = r.powi(-(n as i32));
    Ok(TaylorCoefficients {
        c0,
        c1: nf * c0 / r,
        c2: 0.5 * nf * (nf + 1.0) * c0 / (r * r),
    })
}

/// `α̃ = α n(n+1) / (ω_m² m r^(n+2))`.
pub fn coupling_generic(spec: &PotentialSpec) -> Result<f64> {
    spec.validate()?;
    let alpha = required("alpha", spec.alpha)?;
    // 2·c2 = n(n+1) / r^(n+2)
    let expansion = taylor_expand(spec.n, spec.r)?;
    Ok(alpha * 2.0 * expansion.c2 / (spec.omega_m * spec.omega_m * spec.m))
}

/// `α̃ = q1 q2 / (4π ε0 r³ m ω_m²)`.
pub fn coupling_coulomb(spec: &PotentialSpec) -> Result<f64> {
    spec.validate()?;
    let q1 = required("q1", spec.q1)?;
    let q2 = required("q2", spec.q2)?;
    let c = PhysicalConstants::CODATA;
    Ok(q1 * q2 / (4.0 * PI * c.epsilon_0 * spec.r.powi(3) * spec.m * spec.omega_m * spec.omega_m))
}

/// `α̃ = −G m / (r³ ω_m²)`; always attractive.
pub fn coupling_newtonian(spec: &PotentialSpec) -> Result<f64> {
    spec.validate()?;
    let c = PhysicalConstants::CODATA;
    Ok(-c.g * spec.m / (spec.r.powi(3) * spec.omega_m * spec.omega_m))
}

/// Tolerance around `α̃ = −1/2` reported as marginal.
pub const STABILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Marginal,
    Unstable,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stability::Stable => "stable",
            Stability::Marginal => "marginal",
            Stability::Unstable => "unstable",
        })
    }
}

/// The smallest Hamiltonian eigenvalue is `1 + 2α̃`, so the trap stays
/// bounded from below only for `α̃ > −1/2`.
pub fn check_stability(alpha_tilde: f64) -> Stability {
    let margin = alpha_tilde + 0.5;
    if margin.abs() <= STABILITY_TOL {
        Stability::Marginal
    } else if margin > 0.0 {
        Stability::Stable
    } else {
        Stability::Unstable
    }
}

/// Maps a [`PotentialSpec`] to a dimensionless coupling.
pub trait CouplingModel: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn alpha_tilde(&self, spec: &PotentialSpec) -> Result<f64>;
}

pub struct GenericPower;
pub struct Coulomb;
pub struct Newtonian;

impl CouplingModel for GenericPower {
    fn name(&self) -> &'static str {
        "generic"
    }
    fn description(&self) -> &'static str {
        "alpha/r^n with alpha_tilde = alpha n(n+1) / (omega_m^2 m r^(n+2))"
    }
    fn alpha_tilde(&self, spec: &PotentialSpec) -> Result<f64> {
        coupling_generic(spec)
    }
}

impl CouplingModel for Coulomb {
    fn name(&self) -> &'static str {
        "coulomb"
    }
    fn description(&self) -> &'static str {
        "point charges q1, q2 with alpha_tilde = q1 q2 / (4 pi eps0 r^3 m omega_m^2)"
    }
    fn alpha_tilde(&self, spec: &PotentialSpec) -> Result<f64> {
        coupling_coulomb(spec)
    }
}

impl CouplingModel for Newtonian {
    fn name(&self) -> &'static str {
        "newtonian"
    }
    fn description(&self) -> &'static str {
        "equal masses m with alpha_tilde = -G m / (r^3 omega_m^2)"
    }
    fn alpha_tilde(&self, spec: &PotentialSpec) -> Result<f64> {
        coupling_newtonian(spec)
    }
}

/// Registry of the built-in coupling models, keyed by `PotentialSpec::kind`.
pub fn coupling_models() -> Registry<dyn CouplingModel> {
    let mut reg: Registry<dyn CouplingModel> = Registry::new();
    for model in [
        Box::new(GenericPower) as Box<dyn CouplingModel>,
        Box::new(Coulomb),
        Box::new(Newtonian),
    ] {
        reg.register(model.name(), model);
    }
    reg
}

/// Resolves `spec.kind` in `registry` and evaluates the coupling.
pub fn resolve_coupling(registry: &Registry<dyn CouplingModel>, spec: &PotentialSpec) -> Result<f64> {
    let model = registry.get(&spec.kind).ok_or_else(|| {
        CoreError::param(
            "kind",
            format!(
                "unknown potential kind `{}` (known: {})",
                spec.kind,
                registry.names().collect::<Vec<_>>().join(", ")
            ),
        )
    })?;
    model.alpha_tilde(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cv::make_hamiltonian;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const E: f64 = constants::ELEMENTARY_CHARGE;

    #[test]
    fn taylor_examples() {
        let t = taylor_expand(1, 2.0).unwrap();
        assert_eq!((t.c0, t.c1, t.c2), (0.5, 0.25, 0.125));
        let t = taylor_expand(2, 1.0).unwrap();
        assert_eq!((t.c0, t.c1, t.c2), (1.0, 2.0, 3.0));
        assert!(taylor_expand(1, 0.0).is_err());
        assert!(taylor_expand(1, -1.0).is_err());
        assert!(taylor_expand(0, 1.0).is_err());
    }

    #[test]
    fn taylor_matches_direct_evaluation() {
        for n in 1..=6 {
            for &r in &[1e-6, 0.3, 1.0, 7.5] {
                let t = taylor_expand(n, r).unwrap();
                let dx = 1e-4 * r;
                let direct = (r - dx).powi(-(n as i32));
                let resid = (t.eval(dx) - direct).abs();
                assert!(resid < 1e-10 * t.c0, "n={n} r={r} resid={resid}");
            }
        }
    }

    #[test]
    fn taylor_matches_finite_differences() {
        for n in 1..=5 {
            let r = 1.7;
            let f = |dx: f64| (r - dx).powi(-(n as i32));
            let h = 1e-4;
            let d1 = (f(h) - f(-h)) / (2.0 * h);
            let d2 = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
            let t = taylor_expand(n, r).unwrap();
            assert_relative_eq!(d1, t.c1, max_relative = 1e-6);
            assert_relative_eq!(0.5 * d2, t.c2, max_relative = 1e-6);
        }
    }

    #[test]
    fn generic_coupling_examples() {
        let unit = PotentialSpec::generic(1, 1.0, 1.0, 1.0, 1.0);
        assert_eq!(coupling_generic(&unit).unwrap(), 2.0);
        let zero = PotentialSpec::generic(1, 0.0, 1.0, 1.0, 1.0);
        assert_eq!(coupling_generic(&zero).unwrap(), 0.0);
        let far = PotentialSpec::generic(1, 1.0, 1.0, 1.0, 2.0);
        assert_relative_eq!(coupling_generic(&far).unwrap(), 2.0 / 8.0, max_relative = 1e-15);
        let neg = PotentialSpec::generic(3, -2.0, 1.0, 1.0, 1.0);
        assert!(coupling_generic(&neg).unwrap() < 0.0);
    }

    #[test]
    fn coulomb_table_value() {
        let spec = PotentialSpec::coulomb(E, -E, 1e-16, 100.0, 1e-5);
        let a = coupling_coulomb(&spec).unwrap();
        assert!((a + 0.231).abs() <= 0.002, "alpha_tilde = {a}");
        let neutral = PotentialSpec::coulomb(E, 0.0, 1e-16, 100.0, 1e-5);
        assert_eq!(coupling_coulomb(&neutral).unwrap(), 0.0);
        let repulsive = PotentialSpec::coulomb(E, E, 1e-16, 100.0, 1e-5);
        let a = coupling_coulomb(&repulsive).unwrap();
        assert!(a > 0.0);
        assert_eq!(check_stability(a), Stability::Stable);
    }

    #[test]
    fn newtonian_table_values() {
        let t2 = coupling_newtonian(&PotentialSpec::newtonian(1e-13, 10.0, 1e-6)).unwrap();
        assert_relative_eq!(t2, -6.67e-8, max_relative = 1e-2);
        let reference = coupling_newtonian(&PotentialSpec::newtonian(1e-14, 10.0, 200e-6)).unwrap();
        assert_relative_eq!(reference, -8.34e-16, max_relative = 1e-2);
        let heavier = coupling_newtonian(&PotentialSpec::newtonian(2e-13, 10.0, 1e-6)).unwrap();
        assert_relative_eq!(heavier, 2.0 * t2, max_relative = 1e-15);
    }

    #[test]
    fn specialized_forms_are_half_the_generic_form() {
        let c = PhysicalConstants::CODATA;
        let (m, w, r) = (1e-16, 100.0, 1e-5);
        let cl = coupling_coulomb(&PotentialSpec::coulomb(E, -E, m, w, r)).unwrap();
        let gen = coupling_generic(&PotentialSpec::generic(1, -E * E / (4.0 * PI * c.epsilon_0), m, w, r)).unwrap();
        assert_relative_eq!(gen, 2.0 * cl, max_relative = 1e-14);

        let nw = coupling_newtonian(&PotentialSpec::newtonian(m, w, r)).unwrap();
        let gen = coupling_generic(&PotentialSpec::generic(1, -c.g * m * m, m, w, r)).unwrap();
        assert_relative_eq!(gen, 2.0 * nw, max_relative = 1e-14);
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = PotentialSpec::newtonian(1e-13, 10.0, 1e-6);
        spec.r = 0.0;
        assert!(matches!(
            coupling_newtonian(&spec),
            Err(CoreError::InvalidParameter { name: "r", .. })
        ));
        let mut spec = PotentialSpec::coulomb(E, E, 1e-16, 100.0, 1e-5);
        spec.q2 = None;
        assert!(matches!(
            coupling_coulomb(&spec),
            Err(CoreError::InvalidParameter { name: "q2", .. })
        ));
        let mut spec = PotentialSpec::generic(1, 1.0, 1.0, 1.0, 1.0);
        spec.m = -1.0;
        assert!(coupling_generic(&spec).is_err());
    }

    #[test]
    fn stability_verdicts() {
        assert_eq!(check_stability(-0.4), Stability::Stable);
        assert_eq!(check_stability(-0.5), Stability::Marginal);
        assert_eq!(check_stability(5.0), Stability::Stable);
        assert_eq!(check_stability(-0.6), Stability::Unstable);
    }

    #[test]
    fn registry_dispatches_by_kind() {
        let reg = coupling_models();
        assert_eq!(reg.names().collect::<Vec<_>>(), ["generic", "coulomb", "newtonian"]);
        let spec = PotentialSpec::newtonian(1e-13, 10.0, 1e-6);
        assert_eq!(
            resolve_coupling(&reg, &spec).unwrap(),
            coupling_newtonian(&spec).unwrap()
        );
        let mut bogus = spec.clone();
        bogus.kind = "yukawa".into();
        assert!(matches!(
            resolve_coupling(&reg, &bogus),
            Err(CoreError::InvalidParameter { name: "kind", .. })
        ));
    }

    proptest! {
        #[test]
        fn stable_iff_hamiltonian_positive(alpha in -2.0f64..2.0) {
            let ev = make_hamiltonian(alpha).unwrap().eigenvalues();
            let positive = ev.iter().all(|&e| e > 0.0);
            let stable = check_stability(alpha) == Stability::Stable;
            // the two disagree only inside the marginal window
            prop_assume!((alpha + 0.5).abs() > 1e-11);
            prop_assert_eq!(positive, stable);
        }
    }
}

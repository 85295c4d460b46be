// Copyright 2026 cvent Contributors
// SPDX-License-Identifier: Apache-2.0

//! Declarative comparisons evaluated against a finished run.
//!
//! Scenario files carry reference values and qualitative expectations as
//! data; this module only knows how to evaluate them.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::run::{CellResult, RunResults};
use crate::scenario::{Axis, Param};

/// Picks cells by parameter value, e.g. `{"alpha_tilde": -0.4, "z": 1}`.
pub type Selector = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Increasing,
    Decreasing,
    NonIncreasing,
    NonDecreasing,
}

impl Direction {
    fn holds(self, a: f64, b: f64) -> bool {
        match self {
            Direction::Increasing => b > a,
            Direction::Decreasing => b < a,
            Direction::NonIncreasing => b <= a,
            Direction::NonDecreasing => b >= a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Less,
    Greater,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Check {
    /// Every selected cell is within tolerance of `target`.
    Value {
        label: String,
        quantity: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        at: Option<Selector>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau: Option<f64>,
        target: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rel_tol: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        abs_tol: Option<f64>,
    },
    /// Every selected cell lies in `[min, max]`.
    Range {
        label: String,
        quantity: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        at: Option<Selector>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        min: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max: Option<f64>,
    },
    /// Along one sweep axis (other axes held fixed) the quantity moves in
    /// `direction`.
    Monotone {
        label: String,
        quantity: String,
        along: String,
        direction: Direction,
        #[serde(default)]
        by_magnitude: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau: Option<f64>,
    },
    /// `quantity(lhs) relation quantity(rhs)` for two single cells.
    Compare {
        label: String,
        quantity: String,
        lhs: Selector,
        relation: Relation,
        rhs: Selector,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tau: Option<f64>,
    },
    /// Some trajectory time `τ ≤ max_tau` has `E_N(subject) < E_N(reference)`.
    FallsBelow {
        label: String,
        subject: Selector,
        reference: Selector,
        max_tau: f64,
    },
    /// The selected precision-map cell carries `expect` as its flag.
    Flag {
        label: String,
        at: Selector,
        expect: String,
    },
}

pub const QUANTITIES: [&str; 12] = [
    "alpha_tilde",
    "kappa_tilde",
    "n_th",
    "z",
    "epsilon",
    "e_n",
    "e_n_nats",
    "nu_minus",
    "delta_e_n",
    "relative_error",
    "trajectory_e_n",
    "trajectory_max_e_n",
];

const FLAGS: [&str; 5] = ["ok", "exceeds_unity", "separable", "unstable", "failed"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub label: String,
    pub passed: bool,
    pub detail: String,
}

/// Structural problems with a check, reported as validation errors.
pub fn validate(check: &Check, axes: &[Axis]) -> Vec<String> {
    let mut out = Vec::new();
    let quantity_ok = |q: &str, tau: Option<f64>, out: &mut Vec<String>| {
        if !QUANTITIES.contains(&q) {
            out.push(format!("unknown quantity `{q}` (use {})", QUANTITIES.join(", ")));
        } else if q == "trajectory_e_n" && tau.is_none() {
            out.push("`trajectory_e_n` needs `tau`".into());
        }
    };
    let selector_ok = |s: &Selector, out: &mut Vec<String>| {
        for k in s.keys() {
            if Param::parse(k).is_none() {
                out.push(format!("selector key `{k}` is not a parameter"));
            }
        }
    };
    match check {
        Check::Value {
            quantity,
            at,
            tau,
            rel_tol,
            abs_tol,
            ..
        } => {
            quantity_ok(quantity, *tau, &mut out);
            if let Some(s) = at {
                selector_ok(s, &mut out);
            }
            if rel_tol.is_none() && abs_tol.is_none() {
                out.push("value check needs `rel_tol` or `abs_tol`".into());
            }
        }
        Check::Range {
            quantity,
            at,
            tau,
            min,
            max,
            ..
        } => {
            quantity_ok(quantity, *tau, &mut out);
            if let Some(s) = at {
                selector_ok(s, &mut out);
            }
            if min.is_none() && max.is_none() {
                out.push("range check needs `min` or `max`".into());
            }
        }
        Check::Monotone {
            quantity, along, tau, ..
        } => {
            quantity_ok(quantity, *tau, &mut out);
            match Param::parse(along) {
                Some(p) if axes.iter().any(|a| a.param == p) => {}
                _ => out.push(format!("`along` must name a sweep axis, got `{along}`")),
            }
        }
        Check::Compare {
            quantity,
            lhs,
            rhs,
            tau,
            ..
        } => {
            quantity_ok(quantity, *tau, &mut out);
            selector_ok(lhs, &mut out);
            selector_ok(rhs, &mut out);
        }
        Check::FallsBelow {
            subject,
            reference,
            max_tau,
            ..
        } => {
            selector_ok(subject, &mut out);
            selector_ok(reference, &mut out);
            if !(max_tau.is_finite() && *max_tau >= 0.0) {
                out.push(format!("`max_tau` must be finite and >= 0, got {max_tau}"));
            }
        }
        Check::Flag { at, expect, .. } => {
            selector_ok(at, &mut out);
            if !FLAGS.contains(&expect.as_str()) {
                out.push(format!("unknown flag `{expect}` (use {})", FLAGS.join(", ")));
            }
        }
    }
    out
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn matches(c: &CellResult, s: &Selector) -> bool {
    s.iter().all(|(k, &v)| {
        Param::parse(k)
            .and_then(|p| c.params.get(p))
            .is_some_and(|x| close(x, v))
    })
}

fn select<'a>(results: &'a RunResults, s: Option<&Selector>) -> Vec<&'a CellResult> {
    results
        .cells
        .iter()
        .filter(|c| s.is_none_or(|s| matches(c, s)))
        .collect()
}

fn single<'a>(results: &'a RunResults, s: &Selector) -> Result<&'a CellResult, String> {
    match select(results, Some(s)).as_slice() {
        [one] => Ok(one),
        [] => Err(format!("no cell matches {s:?}")),
        many => Err(format!("{} cells match {s:?}", many.len())),
    }
}

/// The named quantity for one cell, if this run produced it.
pub fn quantity(c: &CellResult, name: &str, tau: Option<f64>) -> Option<f64> {
    let budget = c.budget;
    let precision = c.precision;
    let steady = c.steady.as_ref();
    match name {
        "trajectory_e_n" => c.trajectory_e_n(tau?),
        "trajectory_max_e_n" => c.trajectory.as_ref()?.iter().map(|p| p.report.e_n).reduce(f64::max),
        "e_n" => steady.map(|s| s.report.e_n).or_else(|| precision.and_then(|p| p.e_n)),
        "e_n_nats" => steady.map(|s| s.report.e_n_nats()),
        "nu_minus" => steady.map(|s| s.report.nu_minus),
        "delta_e_n" => budget
            .and_then(|b| b.delta_e_n)
            .or_else(|| precision.and_then(|p| p.delta_e_n)),
        "relative_error" => budget
            .and_then(|b| b.relative_error)
            .or_else(|| precision.and_then(|p| p.relative_error)),
        other => Param::parse(other).and_then(|p| c.params.get(p)),
    }
}

fn describe(c: &CellResult) -> String {
    let p = &c.params;
    let mut s = format!("alpha_tilde={:.4e}", p.alpha_tilde);
    let _ = write!(s, ", kappa_tilde={}, n_th={}, z={}", p.kappa_tilde, p.n_th, p.z);
    if let Some(e) = p.epsilon {
        let _ = write!(s, ", epsilon={e:e}");
    }
    s
}

pub fn evaluate(check: &Check, results: &RunResults) -> CheckOutcome {
    let (label, outcome) = match check {
        Check::Value {
            label,
            quantity: q,
            at,
            tau,
            target,
            rel_tol,
            abs_tol,
        } => (
            label,
            eval_value(results, q, at.as_ref(), *tau, *target, *rel_tol, *abs_tol),
        ),
        Check::Range {
            label,
            quantity: q,
            at,
            tau,
            min,
            max,
        } => (label, eval_range(results, q, at.as_ref(), *tau, *min, *max)),
        Check::Monotone {
            label,
            quantity: q,
            along,
            direction,
            by_magnitude,
            tau,
        } => (label, eval_monotone(results, q, along, *direction, *by_magnitude, *tau)),
        Check::Compare {
            label,
            quantity: q,
            lhs,
            relation,
            rhs,
            tau,
        } => (label, eval_compare(results, q, lhs, *relation, rhs, *tau)),
        Check::FallsBelow {
            label,
            subject,
            reference,
            max_tau,
        } => (label, eval_falls_below(results, subject, reference, *max_tau)),
        Check::Flag { label, at, expect } => (label, eval_flag(results, at, expect)),
    };
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, e));
    CheckOutcome {
        label: label.clone(),
        passed,
        detail,
    }
}

type Eval = Result<(bool, String), String>;

fn values(
    results: &RunResults,
    q: &str,
    at: Option<&Selector>,
    tau: Option<f64>,
) -> Result<Vec<(String, f64)>, String> {
    let cells = select(results, at);
    if cells.is_empty() {
        return Err("no cell matches the selector".into());
    }
    cells
        .into_iter()
        .map(|c| {
            quantity(c, q, tau)
                .map(|v| (describe(c), v))
                .ok_or_else(|| format!("`{q}` not available for {}", describe(c)))
        })
        .collect()
}

fn eval_value(
    results: &RunResults,
    q: &str,
    at: Option<&Selector>,
    tau: Option<f64>,
    target: f64,
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
) -> Eval {
    let tol = rel_tol.map_or(0.0, |r| r * target.abs()) + abs_tol.unwrap_or(0.0);
    let vals = values(results, q, at, tau)?;
    let passed = vals.iter().all(|(_, v)| (v - target).abs() <= tol);
    let shown = vals
        .iter()
        .map(|(_, v)| format!("{v:.6e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok((passed, format!("{q} = {shown}; expected {target:.6e} ± {tol:.3e}")))
}

fn eval_range(
    results: &RunResults,
    q: &str,
    at: Option<&Selector>,
    tau: Option<f64>,
    min: Option<f64>,
    max: Option<f64>,
) -> Eval {
    let vals = values(results, q, at, tau)?;
    let lo = min.unwrap_or(f64::NEG_INFINITY);
    let hi = max.unwrap_or(f64::INFINITY);
    let passed = vals.iter().all(|(_, v)| (lo..=hi).contains(v));
    let shown = vals
        .iter()
        .map(|(_, v)| format!("{v:.6e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok((passed, format!("{q} = {shown}; expected within [{lo:.4e}, {hi:.4e}]")))
}

fn eval_monotone(
    results: &RunResults,
    q: &str,
    along: &str,
    direction: Direction,
    by_magnitude: bool,
    tau: Option<f64>,
) -> Eval {
    let axis = Param::parse(along).ok_or_else(|| format!("unknown axis `{along}`"))?;
    // Group cells by every parameter except the one we move along.
    let mut groups: Vec<(Vec<f64>, Vec<&CellResult>)> = Vec::new();
    for c in &results.cells {
        let key: Vec<f64> = Param::ALL
            .iter()
            .filter(|&&p| p != axis)
            .map(|&p| c.params.get(p).unwrap_or(f64::NAN))
            .collect();
        let same = |k: &Vec<f64>| k.iter().zip(&key).all(|(a, b)| a == b || (a.is_nan() && b.is_nan()));
        match groups.iter_mut().find(|(k, _)| same(k)) {
            Some((_, g)) => g.push(c),
            None => groups.push((key, vec![c])),
        }
    }
    let mut violations = Vec::new();
    let mut pairs = 0usize;
    for (_, mut g) in groups {
        let coord = |c: &CellResult| {
            let x = c.params.get(axis).unwrap_or(f64::NAN);
            if by_magnitude {
                x.abs()
            } else {
                x
            }
        };
        g.sort_by(|a, b| coord(a).total_cmp(&coord(b)));
        let vals: Vec<f64> = g
            .iter()
            .map(|c| quantity(c, q, tau).ok_or_else(|| format!("`{q}` not available for {}", describe(c))))
            .collect::<Result<_, _>>()?;
        for i in 1..g.len() {
            pairs += 1;
            if !direction.holds(vals[i - 1], vals[i]) {
                violations.push(format!(
                    "{q}({along}={}) = {:.6e} then {q}({along}={}) = {:.6e}",
                    g[i - 1].params.get(axis).unwrap_or(f64::NAN),
                    vals[i - 1],
                    g[i].params.get(axis).unwrap_or(f64::NAN),
                    vals[i]
                ));
            }
        }
    }
    let magnitude = if by_magnitude { "|" } else { "" };
    let tau_note = tau.map(|t| format!(" at tau = {t}")).unwrap_or_default();
    if violations.is_empty() {
        Ok((
            true,
            format!("{q}{tau_note} is {direction:?} in {magnitude}{along}{magnitude} over {pairs} neighbouring pairs"),
        ))
    } else {
        Ok((
            false,
            format!(
                "{} of {pairs} neighbouring pairs break {direction:?}{tau_note}: {}",
                violations.len(),
                violations.join("; ")
            ),
        ))
    }
}

fn eval_compare(
    results: &RunResults,
    q: &str,
    lhs: &Selector,
    relation: Relation,
    rhs: &Selector,
    tau: Option<f64>,
) -> Eval {
    let l = single(results, lhs)?;
    let r = single(results, rhs)?;
    let lv = quantity(l, q, tau).ok_or_else(|| format!("`{q}` not available for {}", describe(l)))?;
    let rv = quantity(r, q, tau).ok_or_else(|| format!("`{q}` not available for {}", describe(r)))?;
    let passed = match relation {
        Relation::Less => lv < rv,
        Relation::Greater => lv > rv,
    };
    let op = match relation {
        Relation::Less => "<",
        Relation::Greater => ">",
    };
    Ok((
        passed,
        format!("{q}[{}] = {lv:.6e} {op} {q}[{}] = {rv:.6e}", describe(l), describe(r)),
    ))
}

fn eval_falls_below(results: &RunResults, subject: &Selector, reference: &Selector, max_tau: f64) -> Eval {
    let s = single(results, subject)?;
    let r = single(results, reference)?;
    let (Some(st), Some(rt)) = (&s.trajectory, &r.trajectory) else {
        return Err("both cells need trajectories".into());
    };
    let first = st
        .iter()
        .zip(rt.iter())
        .filter(|(a, _)| a.tau <= max_tau)
        .find(|(a, b)| a.report.e_n < b.report.e_n);
    Ok(match first {
        Some((a, b)) => (
            true,
            format!(
                "first at tau = {}: E_N = {:.6e} < {:.6e}",
                a.tau, a.report.e_n, b.report.e_n
            ),
        ),
        None => (
            false,
            format!("E_N of the subject never drops below the reference for tau <= {max_tau}"),
        ),
    })
}

fn eval_flag(results: &RunResults, at: &Selector, expect: &str) -> Eval {
    let c = single(results, at)?;
    let flag = c
        .precision
        .map(|p| p.flag)
        .or(c.budget.map(|b| b.flag))
        .ok_or_else(|| format!("no precision flag for {}", describe(c)))?;
    Ok((
        flag.as_str() == expect,
        format!("flag = {} at {} (expected {expect})", flag.as_str(), describe(c)),
    ))
}

/// Human-readable comparison report.
pub fn render(scenario: &str, outcomes: &[CheckOutcome], notes: &[String]) -> String {
    let mut s = format!("scenario: {scenario}\n");
    for o in outcomes {
        let _ = writeln!(
            s,
            "{} {}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.label,
            o.detail
        );
    }
    for n in notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}

// Copyright 2026 cvent Contributors
// SPDX-License-Identifier: Apache-2.0

//! Scenario files: schema, validation and resolution into a run plan.
//!
//! Every physical quantity may be written either as a bare number or as
//! `{"value": ..., "unit": "..."}`. Tagged units are checked, never
//! converted.

use std::collections::BTreeMap;
use std::fmt;

use cvent_core::metrology::ErrorSpec;
use cvent_core::potentials::{coupling_models, resolve_coupling};
use cvent_core::steady::{steady_state_solvers, DEFAULT_STEADY_STATE_SOLVER};
use cvent_core::{NoiseModel, PotentialSpec};
use serde::{Deserialize, Serialize};

use crate::checks::{self, Check};
use crate::error::{CliError, CliResult, FieldError};

const DIMENSIONLESS: &[&str] = &["dimensionless", "1", ""];
const MAX_SWEEP_AXES: usize = 2;
const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum QuantityRepr {
    Bare(f64),
    Tagged(TaggedQuantity),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaggedQuantity {
    value: f64,
    unit: String,
}

/// A number with an optional unit tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "QuantityRepr", into = "QuantityRepr")]
pub struct Quantity {
    pub value: f64,
    pub unit: Option<String>,
}

impl From<QuantityRepr> for Quantity {
    fn from(r: QuantityRepr) -> Self {
        match r {
            QuantityRepr::Bare(value) => Quantity { value, unit: None },
            QuantityRepr::Tagged(t) => Quantity {
                value: t.value,
                unit: Some(t.unit),
            },
        }
    }
}

impl From<Quantity> for QuantityRepr {
    fn from(q: Quantity) -> Self {
        match q.unit {
            None => QuantityRepr::Bare(q.value),
            Some(unit) => QuantityRepr::Tagged(TaggedQuantity { value: q.value, unit }),
        }
    }
}

impl Quantity {
    pub fn dimensionless(value: f64) -> Self {
        Quantity {
            value,
            unit: Some("dimensionless".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialInput {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q1: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q2: Option<Quantity>,
    pub m: Quantity,
    pub omega_m: Quantity,
    pub r: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseInput {
    pub kappa_tilde: Quantity,
    pub n_th: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorBudgetInput {
    pub epsilon: Quantity,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_element: BTreeMap<String, Quantity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spacing {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    Linspace(Spacing),
    Geomspace(Spacing),
}

/// Explicit values, or `{"linspace": {...}}` / `{"geomspace": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Generated(GridSpec),
}

impl Grid {
    fn expand(&self, field: &str, errors: &mut Vec<FieldError>) -> Vec<f64> {
        let spaced = |s: &Spacing, geometric: bool, errors: &mut Vec<FieldError>| -> Vec<f64> {
            if s.count == 0 || s.count > MAX_GRID_POINTS {
                errors.push(FieldError::new(
                    format!("{field}.count"),
                    format!("must be between 1 and {MAX_GRID_POINTS}, got {}", s.count),
                ));
                return Vec::new();
            }
            if !s.start.is_finite() || !s.stop.is_finite() {
                errors.push(FieldError::new(field, "start and stop must be finite"));
                return Vec::new();
            }
            if geometric && (s.start <= 0.0 || s.stop <= 0.0) {
                errors.push(FieldError::new(field, "geomspace needs start > 0 and stop > 0"));
                return Vec::new();
            }
            if s.count == 1 {
                return vec![s.start];
            }
            let last = s.count - 1;
            (0..s.count)
                .map(|i| {
                    if i == 0 {
                        s.start
                    } else if i == last {
                        s.stop
                    } else {
                        let t = i as f64 / last as f64;
                        if geometric {
                            (s.start.ln() + (s.stop.ln() - s.start.ln()) * t).exp()
                        } else {
                            s.start + (s.stop - s.start) * t
                        }
                    }
                })
                .collect()
        };
        match self {
            Grid::List(v) => {
                if v.is_empty() {
                    errors.push(FieldError::new(field, "must not be empty"));
                }
                if v.len() > MAX_GRID_POINTS {
                    errors.push(FieldError::new(field, format!("more than {MAX_GRID_POINTS} points")));
                }
                v.clone()
            }
            Grid::Generated(GridSpec::Linspace(s)) => spaced(s, false, errors),
            Grid::Generated(GridSpec::Geomspace(s)) => spaced(s, true, errors),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepInput {
    pub param: String,
    pub values: Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Trajectory,
    SteadyState,
    EntanglementMap,
    PrecisionMap,
    Report,
}

impl OutputKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OutputKind::Trajectory => "trajectory",
            OutputKind::SteadyState => "steady_state",
            OutputKind::EntanglementMap => "entanglement_map",
            OutputKind::PrecisionMap => "precision_map",
            OutputKind::Report => "report",
        }
    }
}

/// A scenario file as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_tilde: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Quantity>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sweep: Vec<SweepInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_budget: Option<ErrorBudgetInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steady_state_method: Option<String>,
    #[serde(default)]
    pub allow_unstable: bool,
    pub outputs: Vec<OutputKind>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Parses a scenario, or the scenario embedded in a run record.
pub fn parse_scenario(text: &str, source_name: &str) -> CliResult<ScenarioFile> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Parse {
        source_name: source_name.to_string(),
        message: e.to_string(),
    })?;
    let is_record = value.get("format").and_then(|f| f.as_str()) == Some(crate::output::RUN_RECORD_FORMAT);
    if is_record {
        let inner = value.get("scenario").cloned().ok_or_else(|| CliError::Parse {
            source_name: source_name.to_string(),
            message: "run record has no `scenario` field".into(),
        })?;
        return serde_json::from_value(inner).map_err(|e| CliError::Parse {
            source_name: format!("{source_name} (scenario)"),
            message: e.to_string(),
        });
    }
    // Re-parse from text so errors carry line and column.
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        source_name: source_name.to_string(),
        message: e.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Param {
    AlphaTilde,
    KappaTilde,
    NTh,
    Z,
    Epsilon,
}

impl Param {
    pub const ALL: [Param; 5] = [
        Param::AlphaTilde,
        Param::KappaTilde,
        Param::NTh,
        Param::Z,
        Param::Epsilon,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Param::AlphaTilde => "alpha_tilde",
            Param::KappaTilde => "kappa_tilde",
            Param::NTh => "n_th",
            Param::Z => "z",
            Param::Epsilon => "epsilon",
        }
    }

    pub fn parse(s: &str) -> Option<Param> {
        Param::ALL.into_iter().find(|p| p.as_str() == s)
    }

    fn check_value(self, v: f64) -> Result<(), String> {
        if !v.is_finite() {
            return Err(format!("must be finite, got {v}"));
        }
        match self {
            Param::AlphaTilde => Ok(()),
            Param::KappaTilde | Param::NTh | Param::Epsilon if v < 0.0 => Err(format!("must be >= 0, got {v}")),
            Param::Z if v <= 0.0 => Err(format!("must be > 0, got {v}")),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub param: Param,
    pub values: Vec<f64>,
}

/// Parameters of one point of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellParams {
    pub index: usize,
    pub alpha_tilde: f64,
    pub kappa_tilde: f64,
    pub n_th: f64,
    pub z: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl CellParams {
    pub fn get(&self, p: Param) -> Option<f64> {
        match p {
            Param::AlphaTilde => Some(self.alpha_tilde),
            Param::KappaTilde => Some(self.kappa_tilde),
            Param::NTh => Some(self.n_th),
            Param::Z => Some(self.z),
            Param::Epsilon => self.epsilon,
        }
    }

    fn set(&mut self, p: Param, v: f64) {
        match p {
            Param::AlphaTilde => self.alpha_tilde = v,
            Param::KappaTilde => self.kappa_tilde = v,
            Param::NTh => self.n_th = v,
            Param::Z => self.z = v,
            Param::Epsilon => self.epsilon = Some(v),
        }
    }
}

/// Where the base coupling came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum AlphaSource {
    Direct,
    Potential { spec: PotentialSpec },
}

/// A validated scenario with every grid expanded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Plan {
    pub name: String,
    pub alpha_tilde: f64,
    pub alpha_source: AlphaSource,
    pub kappa_tilde: f64,
    pub n_th: f64,
    pub z: f64,
    pub error_spec: Option<ErrorSpec>,
    pub axes: Vec<Axis>,
    pub cells: Vec<CellParams>,
    pub taus: Vec<f64>,
    pub steady_state_method: String,
    pub outputs: Vec<OutputKind>,
    pub allow_unstable: bool,
    #[serde(skip)]
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub notes: Vec<String>,
}

impl Plan {
    pub fn wants(&self, kind: OutputKind) -> bool {
        self.outputs.contains(&kind)
    }

    pub fn needs_steady_state(&self) -> bool {
        self.wants(OutputKind::SteadyState) || self.wants(OutputKind::EntanglementMap) || self.wants(OutputKind::Report)
    }

    pub fn needs_budget(&self) -> bool {
        self.wants(OutputKind::Report) && self.cells.iter().any(|c| c.epsilon.is_some())
    }

    pub fn axis(&self, p: Param) -> Option<&Axis> {
        self.axes.iter().find(|a| a.param == p)
    }

    /// The error spec for one cell: the scenario's, with a swept
    /// `epsilon` replacing the common value.
    pub fn error_spec_for(&self, cell: &CellParams) -> Option<ErrorSpec> {
        let eps = cell.epsilon?;
        let mut spec = self.error_spec.clone().unwrap_or_default();
        spec.epsilon = eps;
        Some(spec)
    }
}

struct Validator {
    errors: Vec<FieldError>,
}

impl Validator {
    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.errors.push(FieldError::new(field, message));
    }

    fn quantity(&mut self, field: &str, q: &Quantity, units: &[&str]) -> Option<f64> {
        let mut ok = true;
        if let Some(unit) = &q.unit {
            if !units.iter().any(|u| u == unit) {
                let expected = units.iter().map(|u| format!("`{u}`")).collect::<Vec<_>>().join(" or ");
                self.push(field, format!("expected unit {expected}, got `{unit}`"));
                ok = false;
            }
        }
        if !q.value.is_finite() {
            self.push(field, format!("must be finite, got {}", q.value));
            ok = false;
        }
        ok.then_some(q.value)
    }

    fn param(&mut self, field: &str, q: &Quantity, p: Param) -> Option<f64> {
        let v = self.quantity(field, q, DIMENSIONLESS)?;
        match p.check_value(v) {
            Ok(()) => Some(v),
            Err(msg) => {
                self.push(field, msg);
                None
            }
        }
    }
}

fn potential_spec(v: &mut Validator, p: &PotentialInput) -> Option<PotentialSpec> {
    let known: Vec<&str> = coupling_models().names().collect();
    let kind_ok = known.contains(&p.kind.as_str());
    if !kind_ok {
        v.push(
            "potential.kind",
            format!("unknown coupling model `{}` (known: {})", p.kind, known.join(", ")),
        );
    }
    let m = v.quantity("potential.m", &p.m, &["kg"]);
    let omega = v.quantity("potential.omega_m", &p.omega_m, &["rad/s", "1/s", "s^-1"]);
    let r = v.quantity("potential.r", &p.r, &["m"]);
    for (name, val) in [("potential.m", m), ("potential.omega_m", omega), ("potential.r", r)] {
        if let Some(x) = val {
            if x <= 0.0 {
                v.push(name, format!("must be > 0, got {x}"));
            }
        }
    }
    let q1 = p.q1.as_ref().and_then(|q| v.quantity("potential.q1", q, &["C"]));
    let q2 = p.q2.as_ref().and_then(|q| v.quantity("potential.q2", q, &["C"]));
    // The unit of the generic strength depends on the power, `J m^n`.
    let alpha = p.alpha.as_ref().and_then(|q| {
        if !q.value.is_finite() {
            v.push("potential.alpha", format!("must be finite, got {}", q.value));
            None
        } else {
            Some(q.value)
        }
    });
    match p.kind.as_str() {
        "generic" if p.alpha.is_none() => v.push("potential.alpha", "required for the generic potential"),
        "coulomb" => {
            if p.q1.is_none() {
                v.push("potential.q1", "required for the coulomb potential");
            }
            if p.q2.is_none() {
                v.push("potential.q2", "required for the coulomb potential");
            }
        }
        _ => {}
    }
    if let Some(0) = p.n {
        v.push("potential.n", "power must be >= 1");
    }
    let spec = PotentialSpec {
        kind: p.kind.clone(),
        n: p.n.unwrap_or(1),
        alpha,
        q1,
        q2,
        m: m?,
        omega_m: omega?,
        r: r?,
    };
    kind_ok.then_some(spec)
}

/// Validates every field, collecting all errors before failing, and
/// expands the scenario into a [`Plan`].
pub fn resolve(file: &ScenarioFile) -> CliResult<Plan> {
    let mut v = Validator { errors: Vec::new() };

    if file.name.trim().is_empty() {
        v.push("name", "must not be empty");
    }

    let mut alpha_source = AlphaSource::Direct;
    let alpha_tilde = match (&file.potential, &file.alpha_tilde) {
        (Some(_), Some(_)) => {
            v.push("alpha_tilde", "give either `potential` or `alpha_tilde`, not both");
            None
        }
        (None, None) => {
            v.push("alpha_tilde", "one of `potential` or `alpha_tilde` is required");
            None
        }
        (None, Some(q)) => v.param("alpha_tilde", q, Param::AlphaTilde),
        (Some(p), None) => {
            potential_spec(&mut v, p).and_then(|spec| match resolve_coupling(&coupling_models(), &spec) {
                Ok(a) => {
                    alpha_source = AlphaSource::Potential { spec };
                    Some(a)
                }
                Err(e) => {
                    v.push("potential", e.to_string());
                    None
                }
            })
        }
    };

    let (kappa_tilde, n_th) = match &file.noise {
        Some(n) => (
            v.param("noise.kappa_tilde", &n.kappa_tilde, Param::KappaTilde),
            v.param("noise.n_th", &n.n_th, Param::NTh),
        ),
        None => (Some(0.0), Some(0.0)),
    };
    let z = match &file.z {
        Some(q) => v.param("z", q, Param::Z),
        None => Some(1.0),
    };

    let error_spec = file.error_budget.as_ref().and_then(|b| {
        let eps = v.param("error_budget.epsilon", &b.epsilon, Param::Epsilon);
        let mut per_element = BTreeMap::new();
        for (label, q) in &b.per_element {
            let field = format!("error_budget.per_element.{label}");
            if cvent_core::metrology::Element::from_label(label).is_none() {
                v.push(
                    field.clone(),
                    "not an independent element (use 11, 12, 13, 14, 22, 23, 24, 33, 34, 44)",
                );
            }
            if let Some(x) = v.param(&field, q, Param::Epsilon) {
                per_element.insert(label.clone(), x);
            }
        }
        eps.map(|epsilon| ErrorSpec { epsilon, per_element })
    });

    if file.sweep.len() > MAX_SWEEP_AXES {
        v.push(
            "sweep",
            format!("at most {MAX_SWEEP_AXES} axes, got {}", file.sweep.len()),
        );
    }
    let mut axes: Vec<Axis> = Vec::new();
    for (i, s) in file.sweep.iter().enumerate() {
        let field = format!("sweep[{i}]");
        let Some(param) = Param::parse(&s.param) else {
            let names = Param::ALL.map(|p| p.as_str()).join(", ");
            v.push(
                format!("{field}.param"),
                format!("unknown parameter `{}` (use {names})", s.param),
            );
            continue;
        };
        if axes.iter().any(|a| a.param == param) {
            v.push(format!("{field}.param"), format!("`{param}` is swept twice"));
            continue;
        }
        if param == Param::AlphaTilde && file.potential.is_some() {
            v.push(
                format!("{field}.param"),
                "cannot sweep alpha_tilde when it is derived from `potential`",
            );
        }
        let values = s.values.expand(&format!("{field}.values"), &mut v.errors);
        for (j, &x) in values.iter().enumerate() {
            if let Err(msg) = param.check_value(x) {
                v.push(format!("{field}.values[{j}]"), msg);
            }
        }
        axes.push(Axis { param, values });
    }

    let taus = match &file.time_grid {
        Some(g) => {
            let taus = g.expand("time_grid", &mut v.errors);
            for (j, &t) in taus.iter().enumerate() {
                if !t.is_finite() || t < 0.0 {
                    v.push(format!("time_grid[{j}]"), format!("must be finite and >= 0, got {t}"));
                }
            }
            taus
        }
        None => Vec::new(),
    };

    let method = file
        .steady_state_method
        .clone()
        .unwrap_or_else(|| DEFAULT_STEADY_STATE_SOLVER.to_string());
    let solvers = steady_state_solvers();
    if solvers.get(&method).is_none() {
        v.push(
            "steady_state_method",
            format!(
                "unknown method `{method}` (known: {})",
                solvers.names().collect::<Vec<_>>().join(", ")
            ),
        );
    }

    let mut outputs = file.outputs.clone();
    outputs.sort();
    outputs.dedup();
    if outputs.is_empty() {
        v.push("outputs", "at least one output is required");
    }
    let swept = |p: Param| axes.iter().any(|a| a.param == p);
    if outputs.contains(&OutputKind::Trajectory) && file.time_grid.is_none() {
        v.push("time_grid", "required for the trajectory output");
    }
    if outputs.contains(&OutputKind::EntanglementMap) && axes.is_empty() {
        v.push("sweep", "entanglement_map needs at least one sweep axis");
    }
    if outputs.contains(&OutputKind::PrecisionMap)
        && !(axes.len() == 2 && swept(Param::AlphaTilde) && swept(Param::Epsilon))
    {
        v.push("sweep", "precision_map needs exactly the axes alpha_tilde and epsilon");
    }
    if swept(Param::Epsilon)
        && !outputs
            .iter()
            .any(|o| matches!(o, OutputKind::PrecisionMap | OutputKind::Report))
    {
        v.push(
            "sweep",
            "an epsilon axis only affects the precision_map and report outputs",
        );
    }
    let kappa_zero_possible = kappa_tilde == Some(0.0)
        || axes
            .iter()
            .any(|a| a.param == Param::KappaTilde && a.values.contains(&0.0));
    let needs_steady = outputs.iter().any(|o| {
        matches!(
            o,
            OutputKind::SteadyState | OutputKind::EntanglementMap | OutputKind::Report
        )
    });
    if needs_steady && kappa_zero_possible && file.noise.is_none() {
        v.push("noise", "steady-state outputs need damping; give noise.kappa_tilde > 0");
    }

    for (i, c) in file.checks.iter().enumerate() {
        for msg in checks::validate(c, &axes) {
            v.push(format!("checks[{i}]"), msg);
        }
    }

    if !v.errors.is_empty() {
        return Err(CliError::Validation(v.errors));
    }
    // All `None`s above pushed an error, so these are present.
    let (alpha_tilde, kappa_tilde, n_th, z) = (
        alpha_tilde.expect("validated"),
        kappa_tilde.expect("validated"),
        n_th.expect("validated"),
        z.expect("validated"),
    );
    NoiseModel::new(kappa_tilde, n_th)?;

    let base = CellParams {
        index: 0,
        alpha_tilde,
        kappa_tilde,
        n_th,
        z,
        epsilon: error_spec.as_ref().map(|s| s.epsilon),
    };
    let mut cells = vec![base];
    for axis in &axes {
        cells = cells
            .iter()
            .flat_map(|c| {
                axis.values.iter().map(move |&x| {
                    let mut c = *c;
                    c.set(axis.param, x);
                    c
                })
            })
            .collect();
    }
    for (i, c) in cells.iter_mut().enumerate() {
        c.index = i;
    }

    Ok(Plan {
        name: file.name.clone(),
        alpha_tilde,
        alpha_source,
        kappa_tilde,
        n_th,
        z,
        error_spec,
        axes,
        cells,
        taus,
        steady_state_method: method,
        outputs,
        allow_unstable: file.allow_unstable,
        checks: file.checks.clone(),
        notes: file.notes.clone(),
    })
}

// Copyright 2026 cvent Contributors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if
//! any criterion fails. Tolerances are the contract values; none is
//! loosened to make a criterion pass.

use std::f64::consts::{LN_2, PI};
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use cvent_core::dynamics::DriftDiffusion;
use cvent_core::entanglement::steady_state_log_negativity;
use cvent_core::metrology::{partials, propagate_error, ErrorSpec};
use cvent_core::{
    evolve_closed, evolve_open, log_negativity, make_hamiltonian, propagator, squeezed_state, steady_state_closed_form,
    steady_state_numeric, CovarianceMatrix, EntanglementReport, NoiseModel, SqueezingParameter,
};

const ALPHAS: [f64; 6] = [-0.49, -0.4, -0.2, -0.05, 0.2, 0.4];
const KAPPAS: [f64; 4] = [0.05, 0.5, 1.0, 5.0];
const N_THS: [f64; 3] = [0.0, 0.01, 1.0];

/// Table 1: `α̃ = −0.231`, `κ̃ = 1`, `N_th = 0.01`, `ε = 0.01`.
const TABLE1: (f64, f64, f64, f64) = (-0.231, 1.0, 0.01, 1e-2);
/// Table 2: `α̃ = −6.67e−8`, `κ̃ = 0.1`, `N_th = 1e−9`, `ε = 1e−8`.
const TABLE2: (f64, f64, f64, f64) = (-6.67e-8, 0.1, 1e-9, 1e-8);

type Criterion = (&'static str, &'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn grid() -> impl Iterator<Item = (f64, f64, f64)> {
    ALPHAS.into_iter().flat_map(|a| {
        KAPPAS
            .into_iter()
            .flat_map(move |k| N_THS.into_iter().map(move |n| (a, k, n)))
    })
}

fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
        .collect()
}

fn cvent(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_cvent"))
        .args(args)
        .output()
        .expect("cvent binary runs")
}

fn coupling_via_cli(args: &[&str]) -> Result<f64, String> {
    let mut full = vec!["coupling", "--json"];
    full.extend_from_slice(args);
    let o = cvent(&full);
    if !o.status.success() {
        return Err(String::from_utf8_lossy(&o.stderr).into_owned());
    }
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).map_err(|e| e.to_string())?;
    v["alpha_tilde"]
        .as_f64()
        .ok_or_else(|| "no alpha_tilde in output".into())
}

fn criterion_1() -> Outcome {
    let cases: [(&str, &[&str], f64); 3] = [
        (
            "Coulomb",
            &[
                "--kind",
                "coulomb",
                "--q1",
                "1.602176634e-19",
                "--q2",
                "-1.602176634e-19",
                "--m",
                "1e-16",
                "--omega-m",
                "100",
                "--r",
                "1e-5",
            ],
            -0.231,
        ),
        (
            "Newtonian",
            &["--kind", "newtonian", "--m", "1e-13", "--omega-m", "10", "--r", "1e-6"],
            -6.67e-8,
        ),
        (
            "Newtonian reference",
            &[
                "--kind",
                "newtonian",
                "--m",
                "1e-14",
                "--omega-m",
                "10",
                "--r",
                "200e-6",
            ],
            -8.34e-16,
        ),
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, args, target) in cases {
        match coupling_via_cli(args) {
            Ok(a) => {
                let rel = (a / target - 1.0).abs();
                passed &= rel <= 0.01;
                parts.push(format!("{name} {a:.4e} (rel dev {rel:.2e})"));
            }
            Err(e) => {
                passed = false;
                parts.push(format!("{name} failed: {e}"));
            }
        }
    }
    outcome(passed, parts.join("; "))
}

fn criterion_2() -> Outcome {
    let mut worst_diff = 0.0f64;
    let mut worst_resid = 0.0f64;
    let mut passed = true;
    for (a, k, n) in grid() {
        let noise = NoiseModel::new(k, n).unwrap();
        let closed = steady_state_closed_form(a, &noise).unwrap();
        let h = make_hamiltonian(a).unwrap();
        let numeric = match steady_state_numeric(&h, &noise) {
            Ok(s) => s,
            Err(e) => return outcome(false, format!("numeric solve failed at ({a}, {k}, {n}): {e}")),
        };
        let diff = (closed.matrix() - numeric.matrix()).abs().max();
        let dd = DriftDiffusion::new(&h, &noise);
        let resid = dd
            .lyapunov_residual(numeric.matrix())
            .max(dd.lyapunov_residual(closed.matrix()));
        let rel_resid = resid / dd.d.norm();
        worst_diff = worst_diff.max(diff);
        worst_resid = worst_resid.max(rel_resid);
        passed &= diff <= 1e-9 && rel_resid <= 1e-10;
    }
    outcome(
        passed,
        format!("72 points; max |closed - numeric| = {worst_diff:.2e}, max residual/||D|| = {worst_resid:.2e}"),
    )
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    for (a, k, n) in grid() {
        let noise = NoiseModel::new(k, n).unwrap();
        let lambda_path = steady_state_log_negativity(a, &noise).unwrap();
        let ppt_path = log_negativity(&steady_state_closed_form(a, &noise).unwrap())
            .unwrap()
            .e_n;
        worst = worst.max((lambda_path - ppt_path).abs());
    }
    outcome(worst <= 1e-10, format!("max |E_N(Lambda) - E_N(PPT)| = {worst:.2e}"))
}

fn steady_report(alpha: f64, kappa: f64, n_th: f64) -> (CovarianceMatrix, EntanglementReport) {
    let sigma = steady_state_closed_form(alpha, &NoiseModel::new(kappa, n_th).unwrap()).unwrap();
    let rep = log_negativity(&sigma).unwrap();
    (sigma, rep)
}

fn criterion_4() -> Outcome {
    let (a1, k1, n1, _) = TABLE1;
    let (_, r1) = steady_report(a1, k1, n1);
    let (a2, k2, n2, _) = TABLE2;
    let (_, r2) = steady_report(a2, k2, n2);
    let t1 = (0.10..=0.15).contains(&r1.e_n);
    let t2_ln = (2.6e-8..=4.0e-8).contains(&r2.e_n_nats());
    let t2_log2 = (3.7e-8..=5.8e-8).contains(&r2.e_n);
    outcome(
        t1 && t2_ln && t2_log2,
        format!(
            "Table 1 E_N(log2) = {:.4} in [0.10, 0.15]; Table 2 -ln nu = {:.3e} in [2.6, 4.0]e-8, \
             -log2 nu = {:.3e} in [3.7, 5.8]e-8. Log-base caveat: E_N is defined with log2, but the \
             reference 3.3e-8 matches the natural-log value and 0.119 matches neither base \
             (log2 {:.4}, ln {:.4})",
            r1.e_n,
            r2.e_n_nats(),
            r2.e_n,
            r1.e_n,
            r1.e_n_nats()
        ),
    )
}

fn relative_error(alpha: f64, kappa: f64, n_th: f64, eps: f64) -> f64 {
    let (sigma, _) = steady_report(alpha, kappa, n_th);
    propagate_error(&sigma, &ErrorSpec::uniform(eps))
        .unwrap()
        .relative_error
}

fn criterion_5a() -> Outcome {
    let (a, k, n, e) = TABLE1;
    let rel = relative_error(a, k, n, e);
    outcome(rel <= 0.07 + 0.02, format!("Table 1 relative error {rel:.4} <= 0.09"))
}

fn criterion_5b() -> Outcome {
    let (a, k, n, e) = TABLE2;
    let rel = relative_error(a, k, n, e);
    // Same scenario with the coupling computed from the SI inputs.
    let computed = relative_error(-6.6743e-8, k, n, e);
    let (_, rep) = steady_report(a, k, n);
    let leading = e / (2.0 * rep.e_n_nats());
    outcome(
        (rel - 0.22).abs() <= 0.06,
        format!(
            "Table 2 relative error {rel:.4} vs 0.22 +/- 0.06 ({computed:.4} with alpha_tilde = -6.6743e-8; \
             leading-order eps/(2(-ln nu)) = {leading:.4}; independent of log base)"
        ),
    )
}

fn criterion_6() -> Outcome {
    let alphas = linspace(-0.49, 0.4, 19);
    let taus = linspace(0.0, 20.0, 81);
    let inputs = [1.0, 2.0, 0.25].map(|z| squeezed_state(SqueezingParameter::new(z).unwrap()));
    let mut worst_defect = 0.0f64;
    let mut worst_purity = 0.0f64;
    for &a in &alphas {
        let h = make_hamiltonian(a).unwrap();
        for &t in &taus {
            let s = propagator(&h, t).unwrap();
            worst_defect = worst_defect.max(s.symplectic_defect());
            for sigma0 in &inputs {
                let det = s.apply(sigma0).determinant();
                worst_purity = worst_purity.max((det - 1.0).abs());
            }
        }
    }
    let h0 = make_hamiltonian(0.0).unwrap();
    let mut worst_period = 0.0f64;
    for sigma0 in &inputs {
        for cycles in [1.0, 3.0] {
            let back = evolve_closed(sigma0, &h0, 2.0 * PI * cycles).unwrap();
            worst_period = worst_period.max((back.matrix() - sigma0.matrix()).norm());
        }
    }
    outcome(
        worst_defect < 1e-8 && worst_purity <= 1e-9 && worst_period <= 1e-8,
        format!(
            "max ||S Om S^T - Om||_F = {worst_defect:.2e}, max |det - 1| = {worst_purity:.2e}, \
             2pi-periodicity error = {worst_period:.2e}"
        ),
    )
}

fn closed_e_n(alpha: f64, z: f64, tau: f64) -> f64 {
    let sigma0 = squeezed_state(SqueezingParameter::new(z).unwrap());
    let h = make_hamiltonian(alpha).unwrap();
    log_negativity(&evolve_closed(&sigma0, &h, tau).unwrap()).unwrap().e_n
}

fn criterion_7a() -> Outcome {
    let values: Vec<f64> = [-0.1, -0.2, -0.3, -0.4]
        .iter()
        .map(|&a| closed_e_n(a, 1.0, 5.0))
        .collect();
    let monotone = values.windows(2).all(|w| w[1] > w[0]);
    outcome(
        monotone,
        format!(
            "E_N(tau = 5) at |alpha_tilde| = 0.1..0.4: {}",
            values.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn criterion_7b() -> Outcome {
    let h = make_hamiltonian(-0.4).unwrap();
    let noise = NoiseModel::new(0.05, 0.0).unwrap();
    let s1 = squeezed_state(SqueezingParameter::new(1.0).unwrap());
    let s4 = squeezed_state(SqueezingParameter::new(4.0).unwrap());
    let taus = linspace(0.0, 100.0, 1001);
    let mut below = Vec::new();
    for &t in &taus {
        let e1 = log_negativity(&evolve_open(&s1, &h, &noise, t).unwrap()).unwrap().e_n;
        let e4 = log_negativity(&evolve_open(&s4, &h, &noise, t).unwrap()).unwrap().e_n;
        if e4 < e1 {
            below.push(t);
        }
    }
    let detail = match (below.first(), below.last()) {
        (Some(first), Some(last)) => format!(
            "E_N(z=4) < E_N(z=1) at {} of {} times, first tau = {first}, last tau = {last}",
            below.len(),
            taus.len()
        ),
        _ => "E_N(z=4) never drops below E_N(z=1) for tau <= 100".into(),
    };
    outcome(!below.is_empty(), detail)
}

fn criterion_7c() -> Outcome {
    let kappas = linspace(0.05, 3.0, 60);
    let e = |a: f64, k: f64, n: f64| steady_state_log_negativity(a, &NoiseModel::new(k, n).unwrap()).unwrap();
    let mut breaks = 0usize;
    let mut pairs = 0usize;
    for a in linspace(-0.4, 0.4, 17) {
        for w in kappas.windows(2) {
            pairs += 1;
            if e(a, w[1], 0.0) > e(a, w[0], 0.0) {
                breaks += 1;
            }
        }
    }
    let n_ths = linspace(0.0, 2.0, 41);
    for &k in &kappas {
        for w in n_ths.windows(2) {
            pairs += 1;
            if e(-0.4, k, w[1]) > e(-0.4, k, w[0]) {
                breaks += 1;
            }
        }
    }
    for &n in &n_ths {
        for w in kappas.windows(2) {
            pairs += 1;
            if e(-0.4, w[1], n) > e(-0.4, w[0], n) {
                breaks += 1;
            }
        }
    }
    outcome(
        breaks == 0,
        format!("{breaks} increases among {pairs} neighbouring grid pairs"),
    )
}

fn criterion_7d() -> Outcome {
    let (_, neg) = steady_report(-0.4, 1.0, 0.0);
    let (_, pos) = steady_report(0.4, 1.0, 0.0);
    outcome(
        neg.e_n > pos.e_n,
        format!("E_N(-0.4) = {:.4} > E_N(+0.4) = {:.4}", neg.e_n, pos.e_n),
    )
}

fn criterion_8() -> Outcome {
    let target = -1.0 / LN_2;
    let mut worst = 0.0f64;
    let mut count = 0;
    for (a, k, n) in grid() {
        let (sigma, rep) = steady_report(a, k, n);
        if !rep.entangled {
            continue;
        }
        count += 1;
        match partials(&sigma) {
            Ok(p) => worst = worst.max((p.sum() - target).abs()),
            Err(e) => return outcome(false, format!("partials failed at ({a}, {k}, {n}): {e}")),
        }
    }
    outcome(
        worst <= 1e-4,
        format!("{count} entangled states; max |sum of partials + 1/ln 2| = {worst:.2e}"),
    )
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|e| e == "csv") {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn criterion_9() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let runs: Vec<_> = ["first", "second"]
        .iter()
        .map(|name| {
            let out = tmp.path().join(name);
            let o = cvent(&["reproduce", "table1", "--out", out.to_str().unwrap()]);
            (o.status.success(), csv_files(&out))
        })
        .collect();
    let ok = runs.iter().all(|(s, files)| *s && !files.is_empty());
    let same = runs[0].1 == runs[1].1;
    outcome(
        ok && same,
        format!("{} CSV files, byte-identical across runs: {same}", runs[0].1.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 14] = [
        ("1", "coupling reproduction via `cvent coupling`", criterion_1),
        ("2", "closed-form vs Kronecker steady state", criterion_2),
        ("3", "E_N via Lambda vs PPT pipeline", criterion_3),
        ("4", "table E_N intervals", criterion_4),
        ("5a", "Table 1 relative error <= 0.09", criterion_5a),
        ("5b", "Table 2 relative error 0.22 +/- 0.06", criterion_5b),
        ("6", "closed-dynamics symplecticity, purity, periodicity", criterion_6),
        ("7a", "E_N(tau = 5) monotone in |alpha_tilde|", criterion_7a),
        ("7b", "squeezed input falls below vacuum input", criterion_7b),
        ("7c", "steady E_N non-increasing in N_th and kappa_tilde", criterion_7c),
        ("7d", "attractive/repulsive asymmetry", criterion_7d),
        ("8", "sum of partials = -1/ln 2", criterion_8),
        ("9", "reproduce table1 is deterministic", criterion_9),
        ("9b", "reproduce table1 writes the comparison report", criterion_9b),
    ];
    let mut failed = Vec::new();
    for (id, name, f) in criteria {
        let start = Instant::now();
        let o = f();
        let ms = start.elapsed().as_secs_f64() * 1e3;
        println!(
            "{} criterion {id} ({name}): {} [{ms:.0} ms]",
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
        if !o.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} failing: {}", failed.len(), failed.join(", "));
        ExitCode::FAILURE
    }
}

fn criterion_9b() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("t1");
    let o = cvent(&["reproduce", "table1", "--out", out.to_str().unwrap()]);
    let text = fs::read_to_string(out.join("table1/comparison.txt")).unwrap_or_default();
    let mentions_base = text.contains("log2") && text.contains("natural log");
    outcome(
        o.status.success() && mentions_base,
        "comparison.txt present and states the log-base caveat",
    )
}

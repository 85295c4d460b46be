// Copyright 2026 cvent Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cvent_cli::reproduce::{reproduce, TARGETS};
use cvent_cli::{exit, load_scenario, run_scenario, CliError, CliResult, RunSummary};
use cvent_core::potentials::{check_stability, coupling_models, resolve_coupling};
use cvent_core::PotentialSpec;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  invalid input (scenario parse or validation error, bad arguments)
  3  stability error (alpha_tilde <= -1/2 without allow_unstable)
  4  numeric error (no steady state, non-finite result, solver failure)
  5  I/O error";

#[derive(Parser)]
#[command(name = "cvent", version, about = "Entanglement of two trapped oscillators coupled by a central potential", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or re-run a run_record.json).
    #[command(after_help = EXIT_CODES)]
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads; defaults to the number of cores.
        #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
        jobs: Option<u16>,
    },
    /// Run a built-in scenario set and write a comparison report.
    #[command(after_help = EXIT_CODES)]
    Reproduce {
        #[arg(value_parser = TARGETS.map(|(t, _)| t))]
        target: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
        jobs: Option<u16>,
    },
    /// Dimensionless coupling and stability verdict for a potential (SI units).
    #[command(after_help = EXIT_CODES)]
    Coupling {
        /// Coupling model: generic, coulomb or newtonian.
        #[arg(long)]
        kind: String,
        /// Power of the generic 1/r^n potential.
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Strength of the generic potential, J m^n.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        /// Charge of the first oscillator, C.
        #[arg(long, allow_hyphen_values = true)]
        q1: Option<f64>,
        /// Charge of the second oscillator, C.
        #[arg(long, allow_hyphen_values = true)]
        q2: Option<f64>,
        /// Mass, kg.
        #[arg(long, allow_hyphen_values = true)]
        m: f64,
        /// Trap angular frequency, rad/s.
        #[arg(long = "omega-m", allow_hyphen_values = true)]
        omega_m: f64,
        /// Separation, m.
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
        /// Print JSON instead of key: value lines.
        #[arg(long)]
        json: bool,
    },
}

fn print_summary(s: &RunSummary) {
    println!(
        "{}: wrote {} files to {}",
        s.scenario,
        s.files.len(),
        s.out_dir.display()
    );
    for o in &s.checks {
        println!("  {} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.label, o.detail);
    }
}

fn coupling(cmd: &Command) -> CliResult<()> {
    let Command::Coupling {
        kind,
        n,
        alpha,
        q1,
        q2,
        m,
        omega_m,
        r,
        json,
    } = cmd
    else {
        unreachable!()
    };
    let spec = PotentialSpec {
        kind: kind.clone(),
        n: *n,
        alpha: *alpha,
        q1: *q1,
        q2: *q2,
        m: *m,
        omega_m: *omega_m,
        r: *r,
    };
    let alpha_tilde = resolve_coupling(&coupling_models(), &spec)?;
    let stability = check_stability(alpha_tilde);
    if *json {
        let v = serde_json::json!({"kind": kind, "alpha_tilde": alpha_tilde, "stability": stability});
        println!("{v}");
    } else {
        println!("kind: {kind}");
        println!("alpha_tilde: {}", cvent_cli::output::fmt_f64(alpha_tilde));
        println!("stability: {stability}");
    }
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Run { scenario, out, jobs } => {
            let file = load_scenario(scenario)?;
            print_summary(&run_scenario(&file, out, jobs.map(usize::from))?);
            Ok(())
        }
        Command::Reproduce { target, out, jobs } => {
            for s in reproduce(target, out, jobs.map(usize::from))? {
                print_summary(&s);
            }
            Ok(())
        }
        cmd @ Command::Coupling { .. } => coupling(cmd),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CliError::exit_code(&e) as u8)
        }
    }
}

// Copyright 2026 The discsteer Authors
// SPDX-License-Identifier: Apache-2.0

//! `discsteer` command-line interface.

mod commands;
mod config;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Model, RunConfig};
use output::OutDir;

/// Error carrying the process exit status.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn verification(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<discsteer::Error> for Failure {
    fn from(e: discsteer::Error) -> Self {
        use discsteer::Error::*;
        match e {
            Domain(_)
            | IndexOutOfRange { .. }
            | InvalidParams(_)
            | NotTangent(_)
            | Format(_)
            | Io(_)
            | Json(_) => Self::usage(e.to_string()),
            _ => Self::numeric(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "discsteer",
    version,
    about = "Control synthesis for a radial quantum particle in a deformable disc"
)]
struct Cli {
    /// JSON run configuration; flags take precedence over its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a table of Bessel zeros.
    Zeros(TableArgs),
    /// Check zeros, couplings, non-resonance and Gram conditioning.
    Verify(VerifyArgs),
    /// Solve the moment problem for a linearized steering target.
    Synthesize(SteerArgs),
    /// Run a simulator on a control file.
    Simulate(SimulateArgs),
    /// Local nonlinear steering followed by radius reconstruction.
    Steer(SteerArgs),
    /// Reconstruct the physical radius from a control file.
    Radius(RadiusArgs),
}

#[derive(Args, Default)]
struct TableArgs {
    /// Largest Bessel order.
    #[arg(long)]
    nu: Option<u32>,
    /// Zeros per order.
    #[arg(long)]
    k: Option<usize>,
    /// Absolute zero tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Existing zero table to verify instead of computing one.
    #[arg(long)]
    table: Option<PathBuf>,
    #[command(flatten)]
    table_args: TableArgs,
}

#[derive(Args, Default)]
struct ProblemArgs {
    #[arg(long)]
    theta2: Option<f64>,
    #[arg(long)]
    theta3: Option<f64>,
    /// Control horizon T (default max(1, 2π/γ̃)).
    #[arg(long)]
    horizon: Option<f64>,
    /// Galerkin modes N.
    #[arg(long)]
    modes: Option<usize>,
    /// Time steps of the bilinear simulator.
    #[arg(long)]
    steps: Option<usize>,
    /// Initial state as a JSON array of [re, im] pairs.
    #[arg(long)]
    psi0: Option<PathBuf>,
}

#[derive(Args)]
struct SteerArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Target state as a JSON array of [re, im] pairs.
    #[arg(long)]
    psif: Option<PathBuf>,
    /// Highest mode K entering the moment problem.
    #[arg(long)]
    moment_modes: Option<usize>,
    /// Control grid intervals.
    #[arg(long)]
    intervals: Option<usize>,
    /// Seed of generated endpoint perturbations.
    #[arg(long)]
    seed: Option<u64>,
    /// Size of generated endpoint perturbations in H³.
    #[arg(long)]
    delta: Option<f64>,
    /// Maximum steering updates.
    #[arg(long)]
    iterations: Option<usize>,
    /// Residual at which steering stops.
    #[arg(long)]
    steer_tol: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Control CSV (u for bilinear, v otherwise).
    #[arg(long)]
    control: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<Model>,
    /// Record every n-th step.
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Args)]
struct RadiusArgs {
    /// Control CSV of u.
    #[arg(long)]
    control: Option<PathBuf>,
}

impl TableArgs {
    fn apply(&self, c: &mut RunConfig) {
        c.nu = self.nu;
        c.k = self.k;
        c.tol = self.tol;
    }
}

impl ProblemArgs {
    fn apply(&self, c: &mut RunConfig) {
        c.theta2 = self.theta2;
        c.theta3 = self.theta3;
        c.horizon = self.horizon;
        c.modes = self.modes;
        c.steps = self.steps;
        c.psi0.clone_from(&self.psi0);
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Zeros(_) => "zeros",
            Command::Verify(_) => "verify",
            Command::Synthesize(_) => "synthesize",
            Command::Simulate(_) => "simulate",
            Command::Steer(_) => "steer",
            Command::Radius(_) => "radius",
        }
    }

    /// Flag values as a sparse config.
    fn flags(&self) -> RunConfig {
        let mut c = RunConfig::default();
        match self {
            Command::Zeros(a) => a.apply(&mut c),
            Command::Verify(a) => {
                a.table_args.apply(&mut c);
                c.table.clone_from(&a.table);
            }
            Command::Synthesize(a) | Command::Steer(a) => {
                a.problem.apply(&mut c);
                c.psif.clone_from(&a.psif);
                c.moment_modes = a.moment_modes;
                c.intervals = a.intervals;
                c.seed = a.seed;
                c.delta = a.delta;
                c.iterations = a.iterations;
                c.steer_tol = a.steer_tol;
            }
            Command::Simulate(a) => {
                a.problem.apply(&mut c);
                c.control.clone_from(&a.control);
                c.model = a.model;
                c.stride = a.stride;
            }
            Command::Radius(a) => c.control.clone_from(&a.control),
        }
        c
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.overlay(&cli.command.flags());
    let mut out = OutDir::create(&cli.out)?;
    match &cli.command {
        Command::Zeros(_) => commands::zeros(&mut cfg, &mut out)?,
        Command::Verify(_) => {
            let verdict = commands::verify(&mut cfg, &mut out);
            out.finish(cli.command.name(), &cfg)?;
            return verdict;
        }
        Command::Synthesize(_) => commands::synthesize(&mut cfg, &mut out)?,
        Command::Simulate(_) => commands::simulate_cmd(&mut cfg, &mut out)?,
        Command::Steer(_) => commands::steer(&mut cfg, &mut out)?,
        Command::Radius(_) => commands::radius(&mut cfg, &mut out)?,
    }
    out.finish(cli.command.name(), &cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

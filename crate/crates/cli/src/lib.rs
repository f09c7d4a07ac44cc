//! Batch front end for `qobserver-core`.
//!
//! `qobserver <design|simulate|synthesize|verify|curve> -i config.json -o outdir [--set k=v ...] [--seed N]`
//!
//! Exit codes: 0 success, 1 failed property, 2 invalid input, 3 infeasible synthesis.

// `!(x > 0)` is used deliberately so that NaN is rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod config;
pub mod error;
mod output;

mod curve;
mod design;
mod simulate;
mod synthesize;
mod verify;

pub use config::{Config, Source};
pub use curve::cmd_curve;
pub use design::cmd_design;
pub use error::{CliError, CliResult};
pub use output::{Outcome, SCHEMA_VERSION};
pub use simulate::cmd_simulate;
pub use synthesize::cmd_synthesize;
pub use verify::cmd_verify;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CommandKind {
    Design,
    Simulate,
    Synthesize,
    Verify,
    Curve,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Design => "design",
            CommandKind::Simulate => "simulate",
            CommandKind::Synthesize => "synthesize",
            CommandKind::Verify => "verify",
            CommandKind::Curve => "curve",
        }
    }
}

/// One fully specified invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub input_path: PathBuf,
    pub output_dir: PathBuf,
    /// Raw `key=value` overrides, applied in order.
    pub overrides: Vec<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Parser)]
#[command(name = "qobserver", version, about = "Coherent quantum observer design, simulation and NDPA synthesis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal homodyne quadrature, spectrum, all-pass and realizability report.
    Design(RunArgs),
    /// Monte Carlo trajectories, estimator statistics and output whiteness.
    Simulate(RunArgs),
    /// NDPA and beamsplitter realization of the coupling.
    Synthesize(RunArgs),
    /// Property suite over the configured system.
    Verify(RunArgs),
    /// Tabulates the beamsplitter design function f(theta).
    Curve(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON configuration file.
    #[arg(short = 'i', long = "input", value_name = "FILE")]
    pub input: PathBuf,
    /// Output directory (created if missing).
    #[arg(short = 'o', long = "output", value_name = "DIR")]
    pub output: PathBuf,
    /// Dotted-path override such as `observer.kappa=0.5`; values are parsed as JSON.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Seed for the simulation and the randomized checks.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        let (command, args) = match cli.command {
            Command::Design(a) => (CommandKind::Design, a),
            Command::Simulate(a) => (CommandKind::Simulate, a),
            Command::Synthesize(a) => (CommandKind::Synthesize, a),
            Command::Verify(a) => (CommandKind::Verify, a),
            Command::Curve(a) => (CommandKind::Curve, a),
        };
        RunConfig {
            command,
            input_path: args.input,
            output_dir: args.output,
            overrides: args.set,
            seed: args.seed,
        }
    }
}

/// Loads the configuration and dispatches to the command.
pub fn run(rc: &RunConfig) -> CliResult<Outcome> {
    let (mut cfg, source) = config::load(&rc.input_path, &rc.overrides)?;
    if let Some(seed) = rc.seed {
        if let Some(sim) = cfg.sim.as_mut() {
            sim.seed = seed;
        }
        cfg.verify.get_or_insert_with(Default::default).seed = seed;
    }
    dispatch(rc.command, &cfg, &source, &rc.output_dir)
}

pub fn dispatch(command: CommandKind, cfg: &Config, source: &Source, out: &Path) -> CliResult<Outcome> {
    match command {
        CommandKind::Design => cmd_design(cfg, source, out),
        CommandKind::Simulate => cmd_simulate(cfg, source, out),
        CommandKind::Synthesize => cmd_synthesize(cfg, source, out),
        CommandKind::Verify => cmd_verify(cfg, source, out),
        CommandKind::Curve => cmd_curve(cfg, source, out),
    }
}

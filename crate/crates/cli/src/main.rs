use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use coinflow_cli::commands;
use coinflow_cli::config::{RunConfig, Settings};

/// Simulation and exact analysis of discrete money-exchange models.
#[derive(Parser)]
#[command(name = "coinflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured Markov chain and write histogram/summary artifacts.
    Simulate(RunArgs),
    /// Exact marginals and a detailed-balance report at small (N, L).
    Exact(RunArgs),
    /// Tilted-family asymptotics, LLT error curve, and ensemble TV table.
    Limits(RunArgs),
    /// Run the full validation suite; exit nonzero if any check fails.
    /// A supplied config is resolved first so construction errors surface.
    Validate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` config file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// immediate | saving | saving_offer | reshuffle
    #[arg(long)]
    model: Option<String>,
    /// constant:<gamma> | power:<alpha> | delta0 | table:<v0,v1,...>:<zero|const>
    #[arg(long)]
    weight: Option<String>,
    /// pair_complete | pair_edges:<file> | ksubsets:<m> | custom:<file>
    #[arg(long)]
    groups: Option<String>,
    /// Number of agents.
    #[arg(long)]
    n: Option<u64>,
    /// Total number of coins L (exclusive with --temp/--scale).
    #[arg(long)]
    coins: Option<u64>,
    /// Money temperature T (needs --scale; L = round(N * scale * T)).
    #[arg(long)]
    temp: Option<f64>,
    /// Scale factor a_N for the wealth field.
    #[arg(long)]
    scale: Option<f64>,
    /// Number of group interactions to run.
    #[arg(long)]
    steps: Option<u64>,
    /// RNG seed; replica r uses seed + r.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of independent replicas (run in parallel).
    #[arg(long)]
    replicas: Option<u64>,
    /// Number of intermediate histogram snapshots (0 = final only).
    #[arg(long)]
    snapshots: Option<u64>,
    /// constant | random initial configuration.
    #[arg(long)]
    init: Option<String>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut settings = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        let mut set = |key: &str, value: Option<String>| -> Result<()> {
            if let Some(v) = value {
                settings.set(key, &v)?;
            }
            Ok(())
        };
        set("model", self.model.clone())?;
        set("weight", self.weight.clone())?;
        set("groups", self.groups.clone())?;
        set("n", self.n.map(|v| v.to_string()))?;
        set("coins", self.coins.map(|v| v.to_string()))?;
        set("temp", self.temp.map(|v| v.to_string()))?;
        set("scale", self.scale.map(|v| v.to_string()))?;
        set("steps", self.steps.map(|v| v.to_string()))?;
        set("seed", self.seed.map(|v| v.to_string()))?;
        set("out", self.out.as_ref().map(|v| v.display().to_string()))?;
        set("replicas", self.replicas.map(|v| v.to_string()))?;
        set("snapshots", self.snapshots.map(|v| v.to_string()))?;
        set("init", self.init.clone())?;
        RunConfig::from_settings(&settings)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => args.resolve().and_then(|c| commands::cmd_simulate(&c)).map(|_| true),
        Command::Exact(args) => args.resolve().and_then(|c| commands::cmd_exact(&c)).map(|_| true),
        Command::Limits(args) => args.resolve().and_then(|c| commands::cmd_limits(&c)).map(|_| true),
        Command::Validate(args) => args.resolve().and_then(|c| commands::cmd_validate(&c)),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

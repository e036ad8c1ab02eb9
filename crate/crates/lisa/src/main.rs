//! Thin command-line front end over the experiment runner.

use clap::{Args, Parser, Subcommand};
use lisa::runner::{cmd_mc_check, cmd_metrics, cmd_simulate, cmd_theory, ConfigSource};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "lisa",
    version,
    about = "Selective mixup experiments: closed-form theory sweeps, desk-scale training, Monte Carlo checks and invariance metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; all results land here.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Override a config key, e.g. --set train.epochs=20 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form worst-group error comparison over a fixture or grid.
    Theory(Common),
    /// Train and evaluate the schemes on the synthetic task.
    Simulate(Common),
    /// Monte Carlo cross-check of the closed-form group errors.
    McCheck(Common),
    /// Cramér's V and invariance metrics from dataset/score files.
    Metrics(Common),
}

fn parse_overrides(common: &Common) -> anyhow::Result<Vec<(String, String)>> {
    let mut overrides = Vec::new();
    for set in &common.sets {
        let (key, value) = set
            .split_once('=')
            .ok_or_else(|| anyhow::anyhow!("--set expects KEY=VALUE, got {set:?}"))?;
        overrides.push((key.to_string(), value.to_string()));
    }
    if let Some(seed) = common.seed {
        overrides.push(("seed".to_string(), seed.to_string()));
    }
    Ok(overrides)
}

fn run() -> anyhow::Result<bool> {
    env_logger::Builder::from_env(env_logger::Env::new().filter("LISA_LOG")).init();
    let cli = Cli::parse();
    type Runner = fn(&ConfigSource, &std::path::Path) -> lisa::Result<lisa::runner::CommandOutcome>;
    let (common, runner): (&Common, Runner) = match &cli.command {
        Command::Theory(c) => (c, cmd_theory),
        Command::Simulate(c) => (c, cmd_simulate),
        Command::McCheck(c) => (c, cmd_mc_check),
        Command::Metrics(c) => (c, cmd_metrics),
    };
    if let Some(jobs) = common.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()?;
    }
    let source = ConfigSource::load(&common.config, &parse_overrides(common)?)?;
    log::info!("config hash {}", source.hash);
    let outcome = runner(&source, &common.out)?;
    for line in &outcome.summary {
        println!("{line}");
    }
    Ok(outcome.ok)
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use bcplab::harness::{resolve_jobs, run_scenario, HarnessError, Report, ScenarioConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "bcplab",
    version,
    about = "Ball-covering experiments on finite Banach space models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Minimal open sets and π-bases of the cube and convergent-sequence models.
    Topology(Common),
    /// Bump covering of the C(K) sphere.
    Ck(Common),
    /// Rank-truncation certificates for B(ℓ_p^n).
    Op(Common),
    /// Operator covering transferred to Y and X*.
    Transfer(Common),
}

#[derive(Args)]
struct Common {
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads; BCPLAB_JOBS takes precedence.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn load(command: &Command) -> Result<(ScenarioConfig, &Common), HarnessError> {
    let (cfg, common) = match command {
        Command::Run { config, common } => {
            let text = std::fs::read_to_string(config)
                .map_err(|e| HarnessError::Config(format!("{}: {e}", config.display())))?;
            (ScenarioConfig::from_json(&text)?, common)
        }
        Command::Topology(c) => (ScenarioConfig::preset("topology").expect("preset"), c),
        Command::Ck(c) => (ScenarioConfig::preset("ck").expect("preset"), c),
        Command::Op(c) => (ScenarioConfig::preset("op").expect("preset"), c),
        Command::Transfer(c) => (ScenarioConfig::preset("transfer").expect("preset"), c),
    };
    Ok((cfg, common))
}

fn execute(command: &Command) -> Result<Report, HarnessError> {
    let (mut cfg, common) = load(command)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let report = run_scenario(&cfg, resolve_jobs(common.jobs))?;
    let text = match common.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    match &common.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli.command) {
        Ok(report) => {
            eprintln!(
                "verdict: {:?} ({} trials, {} failed)",
                report.verdict, report.aggregates.trials, report.aggregates.failed
            );
            ExitCode::from(report.verdict.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("bcplab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

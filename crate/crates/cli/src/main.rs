use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rwrs_core::experiments::{self, output::read_summary, Command, ExperimentConfig, RunOutput};

/// Random walk in random scenery lab.
///
/// Exit status: 0 when every check passes, 1 on a failed check, 2 when the
/// run is inconclusive (no Strassen match within the lambda budget).
#[derive(Parser)]
#[command(name = "rwrs-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Three-estimator agreement, Cauchy-Schwarz bound and reflection symmetry.
    VerifyIdentities(RunArgs),
    /// Second-moment and truncation inequalities.
    LemmaBounds(RunArgs),
    /// Annealed limit of n^{-3/4} K_n and the scaling identity for Z_t.
    AnnealedLimit(RunArgs),
    /// Strassen matches of the scenery and the quenched laws at the matches.
    QuenchedScan(RunArgs),
    /// Separation of quenched laws matched to distinct targets.
    NonconvergenceReport(RunArgs),
    /// Samples of int f dL_1 by all three estimators.
    ThetaSample(RunArgs),
    /// Re-run an experiment from its summary.json.
    Replay {
        summary: PathBuf,
        /// Output directory; defaults to the recorded one.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print the default configuration as TOML.
    DefaultConfig,
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration; missing fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenery seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Base seed for walks and Brownian paths.
    #[arg(long)]
    path_seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    replicas: Option<usize>,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                ExperimentConfig::from_toml_file(path).with_context(|| format!("reading config {}", path.display()))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.scenery_seed = s;
        }
        if let Some(s) = self.path_seed {
            cfg.path_seed = s;
        }
        if let Some(d) = &self.out_dir {
            cfg.out_dir = d.clone();
        }
        if let Some(r) = self.replicas {
            cfg.replicas = r;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn report(mut out: RunOutput, dir: &std::path::Path) -> Result<ExitCode> {
    let summary = out.write(dir)?;
    for c in &out.summary.checks {
        let op = if c.direction == "ge" { ">=" } else { "<=" };
        println!(
            "{} {}: {} {op} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.threshold
        );
    }
    println!("verdict: {:?}", out.verdict());
    println!("summary: {}", summary.display());
    Ok(ExitCode::from(out.verdict().exit_code() as u8))
}

fn run(command: Command, args: &RunArgs) -> Result<ExitCode> {
    let cfg = args.config()?;
    let out = experiments::run(command, &cfg)?;
    report(out, &cfg.out_dir)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::VerifyIdentities(a) => run(Command::VerifyIdentities, a),
        Cmd::LemmaBounds(a) => run(Command::LemmaBounds, a),
        Cmd::AnnealedLimit(a) => run(Command::AnnealedLimit, a),
        Cmd::QuenchedScan(a) => run(Command::QuenchedScan, a),
        Cmd::NonconvergenceReport(a) => run(Command::NonconvergenceReport, a),
        Cmd::ThetaSample(a) => run(Command::ThetaSample, a),
        Cmd::Replay { summary, out_dir } => (|| {
            let recorded = read_summary(summary).with_context(|| format!("reading {}", summary.display()))?;
            let dir = out_dir.clone().unwrap_or_else(|| recorded.config.out_dir.clone());
            report(experiments::replay(&recorded)?, &dir)
        })(),
        Cmd::DefaultConfig => ExperimentConfig::default()
            .to_toml_string()
            .map(|s| {
                print!("{s}");
                ExitCode::SUCCESS
            })
            .map_err(Into::into),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(3)
    })
}

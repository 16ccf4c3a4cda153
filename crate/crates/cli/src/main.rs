//! `fkpp`: experiment runner for the generalized Fisher-KPP laboratory.
//!
//! Every subcommand reads a flat key = value config, runs one numerical
//! experiment, and writes CSV data plus a JSON report into the output
//! directory. Outputs are deterministic: identical configs give
//! byte-identical files, with run metadata confined to `meta.json`.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::Serialize;

/// Numerical laboratory for the generalized Fisher-KPP equation
/// u_t = u_xx − u^q + u^p.
#[derive(Parser)]
#[command(name = "fkpp", version)]
struct Cli {
    /// Experiment configuration file (flat `key = value` sections).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory, created if absent.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Reserved for future stochastic features; all current algorithms are
    /// deterministic.
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    /// Suppress the per-run summary line on stdout.
    #[arg(long)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Construct a stationary profile and verify its tail asymptotics.
    Stationary,
    /// Integrate the space-free ODE h' = h^p − h^q and check rate brackets.
    TimeOde,
    /// Evolve κ·(stationary profile) and record diagnostics and snapshots.
    Evolve,
    /// Evolve κ·(stationary profile) and classify the outcome with rate fits.
    Classify,
    /// Bisect the amplitude threshold between decay and blow-up.
    Bisect,
    /// Build a sub/supersolution candidate and verify its residual signs.
    VerifyCandidate,
    /// Renormalized heat-kernel gap of a q = 1 decay run.
    Gap,
    /// Coefficients mapping the general equation onto the normalized one.
    Rescale,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Stationary => "stationary",
            Command::TimeOde => "time-ode",
            Command::Evolve => "evolve",
            Command::Classify => "classify",
            Command::Bisect => "bisect",
            Command::VerifyCandidate => "verify-candidate",
            Command::Gap => "gap",
            Command::Rescale => "rescale",
        }
    }
}

/// Run provenance, kept out of the data files so they stay byte-identical
/// across identical runs.
#[derive(Serialize)]
struct MetaJson<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'static str,
    config_path: String,
    config_text: &'a str,
    seed: Option<u64>,
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    let text = std::fs::read_to_string(&cli.config)
        .with_context(|| format!("reading config {}", cli.config.display()))?;
    let cfg = config::parse_config(&text)?;
    std::fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating output directory {}", cli.out.display()))?;
    let code = match cli.command {
        Command::Stationary => commands::stationary(&cfg, &cli.out, cli.quiet)?,
        Command::TimeOde => commands::time_ode(&cfg, &cli.out, cli.quiet)?,
        Command::Evolve => commands::evolve(&cfg, &cli.out, cli.quiet)?,
        Command::Classify => commands::classify(&cfg, &cli.out, cli.quiet)?,
        Command::Bisect => commands::bisect(&cfg, &cli.out, cli.quiet)?,
        Command::VerifyCandidate => commands::verify_candidate(&cfg, &cli.out, cli.quiet)?,
        Command::Gap => commands::gap(&cfg, &cli.out, cli.quiet)?,
        Command::Rescale => commands::rescale(&cfg, &cli.out, cli.quiet)?,
    };
    output::write_json(
        &cli.out.join("meta.json"),
        &MetaJson {
            tool: "fkpp",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: cli.command.name(),
            config_path: cli.config.display().to_string(),
            config_text: &text,
            seed: cli.seed,
        },
    )?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's default usage-error code is 2, which this tool reserves
            // for failed verifications; route usage errors to 1 instead.
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

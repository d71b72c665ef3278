//! overlay-scout: reconstructs path diversity from traceroute logs, flags
//! delay degradations, and ranks one-hop relay candidates. Emits plot-ready
//! CSV/JSON reports; never renders images.

mod cmd_analyze;
mod cmd_resolve;
mod cmd_synth;
mod manifest;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub const TOOL_NAME: &str = "overlay-scout";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Caps the number of worker threads used for per-pair analyses.
pub const THREADS_ENV: &str = "OVERLAY_SCOUT_THREADS";

#[derive(Parser)]
#[command(name = TOOL_NAME, version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic topology plus measurement files with scheduled
    /// degradations.
    Synth(cmd_synth::SynthArgs),
    /// Run the analyses over traceroute and delay files and emit CSV
    /// reports.
    Analyze(cmd_analyze::AnalyzeArgs),
    /// Resolve IPs to ASNs through a bulk whois-style TCP service.
    Resolve(cmd_resolve::ResolveArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(args) => cmd_synth::run(args),
        Command::Analyze(args) => cmd_analyze::run(args),
        Command::Resolve(args) => cmd_resolve::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

/// Worker thread cap: the environment variable when set, otherwise the
/// available parallelism.
pub fn thread_cap() -> anyhow::Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .map_err(|_| anyhow::anyhow!("{THREADS_ENV}={raw} is not a thread count"))?;
            if n == 0 {
                anyhow::bail!("{THREADS_ENV} must be at least 1");
            }
            Ok(n)
        }
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

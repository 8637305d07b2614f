use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use photon_zb_cli::{parse_config, run_scenario};

/// Runs a photon-zb scenario described by a config file.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// Scenario config file.
    #[arg(long)]
    config: PathBuf,

    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: &Args) -> anyhow::Result<bool> {
    let text = std::fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let cfg = parse_config(&text).with_context(|| format!("in {}", args.config.display()))?;
    let out = args.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let outcome = run_scenario(&cfg, &out, &mut std::io::stdout().lock())?;
    for path in &outcome.artifacts {
        eprintln!("wrote {}", path.display());
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

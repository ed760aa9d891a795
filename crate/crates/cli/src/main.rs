use std::path::PathBuf;
use std::process::ExitCode;

use bardina_cli::{execute, thread_count, RunConfig, Subcommand};
use clap::Parser;

/// Pseudo-spectral experiments for the damped Navier-Stokes-Bardina model.
#[derive(Parser)]
#[command(name = "bardina", version)]
struct Args {
    #[arg(value_enum)]
    subcommand: Subcommand,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("config error: {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let cfg = match RunConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    match execute(args.subcommand, &cfg, &args.out, thread_count()) {
        Ok(summary) => {
            for f in &summary.outputs {
                println!("{}", args.out.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

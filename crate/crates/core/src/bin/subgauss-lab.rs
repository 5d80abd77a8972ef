//! Command-line front end.
//!
//!   subgauss-lab <command> --config <file-or-inline-json>
//!                [--out <dir>] [--n <int>] [--threads <int>]
//!
//! The command verb selects the pipeline; the configuration document
//! supplies the spec and parameters. SUBGAUSS_LAB_THREADS is the fallback
//! for --threads.

use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;
use subgauss_lab::cli;
use subgauss_lab::config::{self, Command};

#[derive(Parser, Debug)]
#[command(
    name = "subgauss-lab",
    about = "Numerical laboratory for strictly subgaussian laws and Renyi divergences of normalized sums",
    version
)]
struct Args {
    /// construct | diagnose | density | divergence | sweep | llt
    command: String,
    /// Path to a JSON config, or an inline JSON document starting with '{'
    #[arg(long)]
    config: String,
    /// Output directory (default: current directory)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the n parameter of the config
    #[arg(long)]
    n: Option<u32>,
    /// Worker threads (fallback: SUBGAUSS_LAB_THREADS, then all cores)
    #[arg(long)]
    threads: Option<usize>,
}

fn run(args: Args) -> Result<String, (i32, String)> {
    let command = Command::parse(&args.command).map_err(|e| (2, format!("{e}")))?;
    let doc = if args.config.trim_start().starts_with('{') {
        args.config.clone()
    } else {
        std::fs::read_to_string(&args.config)
            .map_err(|e| (2, format!("cannot read config {}: {e}", args.config)))?
    };
    let mut cfg = config::parse_config(&doc).map_err(|e| (2, format!("{e}")))?;
    if cfg.command != command {
        // the CLI verb wins; the config document states the default intent
        cfg.command = command;
    }
    if let Some(n) = args.n {
        if n < 1 {
            return Err((2, "n must be >= 1".to_string()));
        }
        cfg.n = Some(n);
    }
    let threads = args.threads.or_else(|| {
        std::env::var("SUBGAUSS_LAB_THREADS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    let out_dir = args
        .out
        .or(cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let arts = cli::dispatch(&cfg, &out_dir, threads)
        .map_err(|e| (cli::exit_code_for(&e), format!("{e}")))?;
    Ok(arts.stdout)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(stdout) => {
            print!("{stdout}");
            ExitCode::SUCCESS
        }
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code as u8)
        }
    }
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fedsubmax_cli::experiment::prepare;
use fedsubmax_cli::{load_config, run_brute, run_experiment, CliError, Result, RunOptions};
use serde_json::json;

#[derive(Parser)]
#[command(name = "fedsubmax", version, about = "Federated submodular maximization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured algorithm and write JSON-lines metrics.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's output path; `-` means stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record wall-clock time in the summary.
        #[arg(long)]
        timing: bool,
    },
    /// Check a config and the data it references.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the exact optimum of the configured instance.
    Brute {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("FEDSUBMAX_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::validation("FEDSUBMAX_THREADS", format!("expected a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::validation("FEDSUBMAX_THREADS", e.to_string()))
}

fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            let file = File::create(p).map_err(|source| CliError::Io {
                path: p.clone(),
                source,
            })?;
            Ok(Box::new(BufWriter::new(file)))
        }
        _ => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

fn flush(mut out: Box<dyn Write>) -> Result<()> {
    out.flush().map_err(|source| CliError::Io {
        path: "<output>".into(),
        source,
    })
}

fn execute(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            timing,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let mut w = sink(out.as_ref().or(cfg.output.as_ref()))?;
            run_experiment(&cfg, &mut w, RunOptions { timing })?;
            flush(w)
        }
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            let (instance, m) = prepare(&cfg)?;
            let rec = json!({
                "record": "valid",
                "algorithm": cfg.algorithm.name(),
                "n": instance.ground_size(),
                "clients": instance.population().len(),
                "rank": m.rank(),
            });
            println!("{rec}");
            Ok(())
        }
        Command::Brute { config, out } => {
            let cfg = load_config(&config)?;
            let mut w = sink(out.as_ref())?;
            run_brute(&cfg, &mut w)?;
            flush(w)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_record());
            ExitCode::FAILURE
        }
    }
}

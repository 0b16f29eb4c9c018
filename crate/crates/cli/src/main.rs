use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mmgks_cli::config::{Overrides, RunConfig};
use mmgks_cli::{compare, run, CliError};

#[derive(Parser)]
#[command(name = "mmgks", version, about = "Edge-preserving reconstruction of dynamic inverse problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configured experiment and write its artifacts.
    Reconstruct {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Noise seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Regularizer override (case-insensitive).
        #[arg(long)]
        method: Option<String>,
        /// Project every iterate onto the nonnegative orthant.
        #[arg(long)]
        nonneg: bool,
    },
    /// Tabulate completed runs, best total RRE first.
    Compare {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
    },
}

fn reconstruct(
    config: &Path,
    out: Option<PathBuf>,
    overrides: Overrides,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", config.display())))?;
    let cfg = RunConfig::from_json(&text)?;
    let resolved = cfg.resolve(&overrides)?;
    let out_dir = out
        .or(cfg.output_dir.clone())
        .ok_or_else(|| CliError::Config("no output directory: pass --out or set output_dir".into()))?;
    let summary = run::run(&resolved, &out_dir)?;
    let exits: Vec<&str> = summary.solves.iter().map(|s| s.exit_reason.as_str()).collect();
    println!(
        "{} {}: total RRE {:.4}, exit {}, artifacts in {}",
        summary.experiment,
        summary.method,
        summary.quality.rre_total,
        exits.join(","),
        out_dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Reconstruct { config, out, seed, method, nonneg } => {
            reconstruct(&config, out, Overrides { seed, method, nonneg })
        }
        Command::Compare { dirs } => {
            let refs: Vec<&Path> = dirs.iter().map(PathBuf::as_path).collect();
            compare::rows(&refs).map(|rows| print!("{}", compare::render(&rows)))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mmgks: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

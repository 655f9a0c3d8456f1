use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hdch_cli::commands::{compare, parse_amplitudes, parse_sweep, run, sweep};
use hdch_cli::config::{RunConfig, OUT_ENV};
use hdch_cli::plot::plot;
use hdch_cli::verify::run_suite;
use hdch_cli::{CliError, CliResult};

/// Hele-Shaw-Cahn-Hilliard solver: runs, verification suites, experiments and plots.
#[derive(Debug, Parser)]
#[command(name = "hdch", version)]
struct Cli {
    /// Worker threads for sweeps and comparisons.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configuration: diag.csv, run.json and optional snapshots.
    Run { config: PathBuf },
    /// Run a property suite: operators, potential, elliptic, darcy, scheme or theorems.
    Verify { suite: String },
    /// Continuous-dependence experiment; writes dependence.csv.
    Compare {
        config: PathBuf,
        /// Comma-separated perturbation amplitudes.
        #[arg(long, value_name = "A1,A2,...")]
        amps: String,
    },
    /// One run directory per parameter value.
    Sweep {
        config: PathBuf,
        /// `key=v1,v2,...` with key `section.field` or a unique field name.
        #[arg(long, value_name = "KEY=V1,V2,...")]
        param: String,
    },
    /// SVG of a diag.csv or PPM heatmap of a .hdch snapshot.
    Plot {
        file: PathBuf,
        /// Output directory (default: $HDCH_OUT, else next to the input).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path) -> CliResult<RunConfig> {
    Ok(RunConfig::load(path)?.with_env_output())
}

fn execute(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Run { config } => {
            let summary = run(&load(&config)?)?;
            println!(
                "{} records, {} snapshots in {}",
                summary.records.len(),
                summary.snapshots,
                summary.dir.display()
            );
        }
        Command::Verify { suite } => {
            run_suite(&suite)?;
        }
        Command::Compare { config, amps } => {
            let path = compare(&load(&config)?, &parse_amplitudes(&amps)?)?;
            println!("wrote {}", path.display());
        }
        Command::Sweep { config, param } => {
            let (key, values) = parse_sweep(&param)?;
            for s in sweep(&load(&config)?, &key, &values)? {
                println!("{}: {} records", s.dir.display(), s.records.len());
            }
        }
        Command::Plot { file, out } => {
            let dir = out
                .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
                .or_else(|| file.parent().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("."));
            println!("wrote {}", plot(&file, &dir)?.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

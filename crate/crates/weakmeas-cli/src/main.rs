use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use weakmeas_cli::config::{ExperimentConfig, SweepParam};
use weakmeas_cli::pipeline::{run_experiment, run_sweep, RunError};

/// Simulator and signal-analysis toolkit for continuously monitored qubits and
/// their classical stand-in processes.
#[derive(Parser)]
#[command(name = "weakmeas", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one experiment config and write its artifacts.
    Run {
        /// Path to a TOML experiment config.
        config: PathBuf,
        /// Artifact directory; defaults to the config's output_dir, then <stem>_out.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to one per core.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Repeat a config across parameter values, one derived-seed run per value.
    Sweep {
        /// Path to a TOML experiment config.
        config: PathBuf,
        /// Parameter path, e.g. detector.s0 or analysis.tau.
        #[arg(long)]
        param: String,
        /// Comma-separated parameter values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Root directory for the per-value run directories.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Override the config's base seed (member i runs at base + i).
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to one per core.
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn main() -> ExitCode {
    // clap itself exits with code 2 on usage errors, matching the config-error code.
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ RunError::Config(_)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e @ RunError::Runtime(_)) => {
            eprintln!("{e}");
            ExitCode::from(3)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Run {
            config,
            output_dir,
            seed,
            threads,
        } => {
            init_threads(threads)?;
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let out_dir = resolve_out_dir(output_dir, &cfg, &config);
            let outcome = run_experiment(&cfg, &out_dir)?;
            print!("{}", outcome.summary);
            println!("artifacts: {}", out_dir.display());
            Ok(())
        }
        Command::Sweep {
            config,
            param,
            values,
            output_dir,
            seed,
            threads,
        } => {
            init_threads(threads)?;
            let mut cfg = ExperimentConfig::from_path(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let param = SweepParam::parse(&param)?;
            let out_root = resolve_out_dir(output_dir, &cfg, &config);
            let outcome = run_sweep(&cfg, param, &values, &out_root)?;
            println!(
                "sweep over {} ({} members):",
                outcome.summary.param,
                outcome.summary.rows.len()
            );
            for r in &outcome.summary.rows {
                println!(
                    "  {} = {}  seed {}  -> {}",
                    outcome.summary.param, r.value, r.seed, r.run_dir
                );
            }
            println!("margins: {}", outcome.csv_path.display());
            println!("artifacts: {}", out_root.display());
            Ok(())
        }
    }
}

fn init_threads(threads: Option<usize>) -> Result<(), RunError> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| RunError::Runtime(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn resolve_out_dir(flag: Option<PathBuf>, cfg: &ExperimentConfig, config_path: &Path) -> PathBuf {
    flag.or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| {
        let stem = config_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".to_owned());
        PathBuf::from(format!("{stem}_out"))
    })
}

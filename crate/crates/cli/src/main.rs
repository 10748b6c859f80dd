use std::path::PathBuf;
use std::process::ExitCode;

use abcmc_cli::{emit_compatibility_table, expand_config, run_experiment, CliError, ExperimentConfig, ExperimentId, RunOptions};
use abcmc_core::numerics::SeedSpec;
use clap::{Args, Parser, Subcommand};

/// Rejection-ABC model choice experiments.
#[derive(Parser)]
#[command(name = "abcmc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Named experiment (fig1..fig6, validate_gl, validate_popgen).
    #[arg(long, conflicts_with = "config")]
    experiment: Option<String>,
    /// JSON experiment configuration (as written by `expand`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Multiplies table sizes, replications and pop-gen loci/individuals.
    #[arg(long)]
    scale: Option<f64>,
    /// Root seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write records.csv, summary.json and config_expanded.json.
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: PathBuf,
        /// Keep existing records in OUT and compute only the missing cells.
        #[arg(long)]
        resume: bool,
    },
    /// Print the fully explicit configuration of an experiment.
    Expand {
        #[command(flatten)]
        source: Source,
    },
    /// Write the predicted compatibility table as CSV.
    Compat {
        #[command(flatten)]
        source: Source,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a validation experiment (common-mean test of predictive summaries).
    Validate {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        resume: bool,
    },
}

fn load(source: &Source) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match (&source.experiment, &source.config) {
        (Some(id), None) => expand_config(id.parse::<ExperimentId>()?)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?
        }
        _ => return Err(CliError::config("experiment", "give exactly one of --experiment or --config")),
    };
    if let Some(scale) = source.scale {
        cfg.apply_scale(scale)?;
    }
    if let Some(seed) = source.seed {
        cfg.seed = SeedSpec::new(seed);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(value) = std::env::var("ABCMC_THREADS") {
        let n: usize = value
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::config("ABCMC_THREADS", format!("expected a positive integer, got `{value}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Run { source, out, resume } => {
            let mut cfg = load(&source)?;
            cfg.output_dir = Some(out.clone());
            let result = run_experiment(&cfg, &out, &RunOptions { resume, progress: true })?;
            eprintln!("wrote {} records to {}", result.records.len(), out.display());
        }
        Command::Validate { source, out, resume } => {
            let mut cfg = load(&source)?;
            if cfg.validation.is_none() {
                return Err(CliError::config("validation", "experiment has no validation section"));
            }
            cfg.output_dir = Some(out.clone());
            let result = run_experiment(&cfg, &out, &RunOptions { resume, progress: true })?;
            for cell in &result.summary.cells {
                println!(
                    "{} n={} truth={}: rejection rate {:.3}",
                    cell.statistic_set,
                    cell.sample_size,
                    cell.true_model,
                    cell.rejection_rate.unwrap_or(f64::NAN)
                );
            }
        }
        Command::Expand { source } => {
            let cfg = load(&source)?;
            println!("{}", serde_json::to_string_pretty(&cfg).map_err(|e| CliError::io("stdout", e))?);
        }
        Command::Compat { source, out } => {
            let cfg = load(&source)?;
            emit_compatibility_table(&cfg, out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("abcmc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use randsum::harness::{
    render_bound, render_repro, render_rows, run_bound, run_reproduce, run_sweep_rho, run_verify,
    ExperimentConfig, OutputFormat, ReproSettings,
};
use randsum::{Error, Result};

#[derive(Parser)]
#[command(name = "randsum", about = "Approximation error bounds for random sums", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// RNG seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo budget override.
    #[arg(long, global = true)]
    mc_budget: Option<u64>,

    /// Tail truncation budget override.
    #[arg(long, global = true)]
    tail_eps: Option<f64>,

    /// Write the rendered output to this path as well as stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format: csv or text.
    #[arg(long, global = true)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a bound for one configured model.
    Bound {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate a bound and the distance it dominates, and check dominance.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-derive a published worked example over a parameter grid.
    Reproduce {
        #[arg(long)]
        id: String,
        /// Grid override for the example's leading parameter.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
    },
    /// Verify one configuration across a grid of correlation values.
    SweepRho {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        rhos: Vec<f64>,
    },
}

fn load_config(cli: &Cli, path: &PathBuf) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(budget) = cli.mc_budget {
        cfg.mc_budget = budget;
    }
    if let Some(eps) = cli.tail_eps {
        cfg.tail_eps = eps;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    if cli.format.is_some() {
        cfg.format = cli.format;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(output: &str, out: Option<&PathBuf>) -> Result<()> {
    print!("{output}");
    if let Some(path) = out {
        std::fs::write(path, output)?;
    }
    Ok(())
}

/// Ok(true) means every verification row passed.
fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Bound { config } => {
            let cfg = load_config(cli, config)?;
            let report = run_bound(&cfg)?;
            let format = cfg.format.unwrap_or(OutputFormat::Text);
            emit(&render_bound(&cfg, &report, format), cfg.out.as_ref())?;
            Ok(true)
        }
        Command::Verify { config } => {
            let cfg = load_config(cli, config)?;
            let row = run_verify(&cfg)?;
            let pass = row.pass;
            let format = cfg.format.unwrap_or(OutputFormat::Text);
            emit(&render_rows(&[row], format), cfg.out.as_ref())?;
            Ok(pass)
        }
        Command::Reproduce { id, grid } => {
            let mut settings = ReproSettings::default();
            if let Some(seed) = cli.seed {
                settings.seed = seed;
            }
            if let Some(budget) = cli.mc_budget {
                settings.mc_budget = budget;
            }
            if let Some(eps) = cli.tail_eps {
                settings.tail_eps = eps;
            }
            let rows = run_reproduce(id, grid.as_deref(), &settings)?;
            let format = cli.format.unwrap_or(OutputFormat::Text);
            emit(&render_repro(&rows, format), cli.out.as_ref())?;
            Ok(true)
        }
        Command::SweepRho { config, rhos } => {
            let cfg = load_config(cli, config)?;
            let rows = run_sweep_rho(&cfg, rhos)?;
            let pass = rows.iter().all(|r| r.pass);
            let format = cfg.format.unwrap_or(OutputFormat::Text);
            emit(&render_rows(&rows, format), cfg.out.as_ref())?;
            Ok(pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed: bound fell below the measured distance");
            ExitCode::from(2)
        }
        Err(err @ (Error::Config(_) | Error::InvalidParameter(_) | Error::Unsupported(_))) => {
            eprintln!("config error: {err}");
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

//! Command-line grammar and dispatch.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use sbda_core::metrics::{HV_REPORT_SCALE, MAX_EAF_GRID};

use crate::compare::{cmd_compare, CompareOptions};
use crate::config::{ConfigFile, ExperimentConfig, Overrides};
use crate::dump::{cmd_dump_qubo, cmd_gen_instance};
use crate::metrics::cmd_metrics;
use crate::run::{cmd_run, hypervolume_stats};

#[derive(Debug, Parser)]
#[command(
    name = "sbda",
    version,
    about = "Scalarisation-based bi-objective portfolio QUBO experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run seeded experiments and write fronts, logs and hypervolumes.
    Run {
        /// Flat `key = value` configuration file; flags take precedence.
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Attainment-function difference between two run directories.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(short = 'o', long = "out")]
        output: PathBuf,
        /// Attainment levels to export, e.g. `1,10,20`.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
        /// Maximum number of grid cells.
        #[arg(long, default_value_t = MAX_EAF_GRID)]
        grid_cap: usize,
    },
    /// Write the risk, return and constraint matrices as triplet text.
    DumpQubo {
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Recompute hypervolumes, counts and the attainment function of a run
    /// directory from its stored fronts.
    Metrics {
        dir: PathBuf,
        /// Override the counting rule recorded in the manifest.
        #[arg(long)]
        count_duplicates: Option<bool>,
    },
    /// Generate a synthetic instance in the benchmark format.
    GenInstance {
        #[arg(long)]
        assets: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        name: Option<String>,
        #[arg(short = 'o', long = "out")]
        output: PathBuf,
    },
}

fn resolve(config: &Option<PathBuf>, overrides: &Overrides) -> Result<ExperimentConfig> {
    let file = match config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    Ok(ExperimentConfig::resolve(overrides, &file)?)
}

/// Executes a parsed command, printing a short summary to stdout.
pub fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, overrides } => {
            let cfg = resolve(&config, &overrides)?;
            let manifest = cmd_run(&cfg)?;
            let (mean, sd) = hypervolume_stats(&manifest);
            println!(
                "{} runs of {} on {} ({} variables): hypervolume {:.6e} ± {:.3e} ({:.6e} ± {:.3e} ×1e23)",
                manifest.runs.len(),
                cfg.strategy,
                manifest.instance.name,
                manifest.instance.n_vars,
                mean,
                sd,
                mean / HV_REPORT_SCALE,
                sd / HV_REPORT_SCALE
            );
            println!("outputs in {}", cfg.output.display());
        }
        Command::Compare {
            a,
            b,
            output,
            levels,
            grid_cap,
        } => {
            let opts = CompareOptions { levels, grid_cap };
            let summary = cmd_compare(&a, &b, &output, &opts)?;
            println!(
                "{} grid points, EAF difference in [{}, {}]; {} files written to {}",
                summary.grid_points,
                summary.min_diff,
                summary.max_diff,
                summary.written.len(),
                output.display()
            );
        }
        Command::DumpQubo { config, overrides } => {
            let cfg = resolve(&config, &overrides)?;
            for path in cmd_dump_qubo(&cfg)? {
                println!("{}", path.display());
            }
        }
        Command::Metrics {
            dir,
            count_duplicates,
        } => {
            for row in cmd_metrics(&dir, count_duplicates)? {
                println!(
                    "run {}: hypervolume {:.6e}, count {}",
                    row.run, row.hypervolume, row.count
                );
            }
        }
        Command::GenInstance {
            assets,
            seed,
            name,
            output,
        } => {
            let name = name.unwrap_or_else(|| format!("synthetic{assets}"));
            cmd_gen_instance(&name, assets, seed, &output)?;
            println!("{}", output.display());
        }
    }
    Ok(())
}

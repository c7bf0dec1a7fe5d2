//! `sbda run`: independent seeded runs of one weight strategy.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use sbda_core::annealer::MAX_EXACT_VARS;
use sbda_core::metrics::mean_stdev;
use sbda_core::scalarise::GapSpace;
use sbda_core::{
    build_qubos, decode, default_reference, hypervolume_2d, is_feasible, run_sbda, BiObjectiveQubo,
    BitVector, EncodingScheme, ExactSolver, PortfolioInstance, PortfolioQubos, QuboSolver,
    ReferencePoint, RunConfig, SimulatedAnnealer,
};

use crate::config::{ExperimentConfig, SolverKind};
use crate::files::{self, create_dir, run_dir, write_atomic};
use crate::UsageError;

/// An instance with its encoding and QUBO matrices.
pub struct LoadedProblem {
    pub instance: PortfolioInstance,
    pub encoding: EncodingScheme,
    pub qubos: PortfolioQubos,
    pub reference: ReferencePoint,
}

impl LoadedProblem {
    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        let text = files::read_text(&cfg.instance)?;
        let name = cfg
            .instance
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let instance = PortfolioInstance::parse_orlib(&name, &text)
            .with_context(|| format!("cannot parse instance {}", cfg.instance.display()))?;
        let encoding = EncodingScheme::new(
            instance.n_assets(),
            cfg.cardinality,
            cfg.eps,
            cfg.delta,
            cfg.bits_per_asset,
        )
        .map_err(|e| UsageError(e.to_string()))?;
        let qubos = build_qubos(&instance, &encoding)?;
        let reference = default_reference(&qubos.risk, &qubos.neg_return);
        Ok(LoadedProblem {
            instance,
            encoding,
            qubos,
            reference,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.encoding.n_vars()
    }

    pub fn info(&self) -> InstanceInfo {
        InstanceInfo {
            name: self.instance.name.clone(),
            n_assets: self.instance.n_assets(),
            n_vars: self.n_vars(),
            encoding: self.encoding.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub name: String,
    pub n_assets: usize,
    pub n_vars: usize,
    pub encoding: EncodingScheme,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub hypervolume: f64,
    pub count: usize,
    /// Solutions archived before non-dominated filtering.
    pub archived: usize,
    pub wall_time: f64,
}

/// Written to `manifest.json`; together with the instance file it fixes
/// every number in the other outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub software_version: String,
    pub config: ExperimentConfig,
    /// Instance path resolved at run time.
    pub instance_path: PathBuf,
    pub instance: InstanceInfo,
    pub reference: ReferencePoint,
    /// Per-run total time budget in seconds (unused with fixed sweeps).
    pub time_budget_seconds: f64,
    pub runs: Vec<RunSummary>,
    pub total_wall_time: f64,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(files::MANIFEST);
        let text = files::read_text(&path)?;
        serde_json::from_str(&text)
            .with_context(|| format!("malformed manifest {}", path.display()))
    }
}

#[derive(Serialize)]
struct PortfolioRecord<'a> {
    f1: f64,
    f2: f64,
    bits_hex: String,
    feasible: bool,
    #[serde(flatten)]
    portfolio: &'a sbda_core::DecodedPortfolio,
}

/// Executes `cfg.runs` runs and writes all artifacts under `cfg.output`.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<Manifest> {
    cfg.validate()?;
    let problem = LoadedProblem::load(cfg)?;
    let n_vars = problem.n_vars();
    if cfg.solver == SolverKind::Exact && n_vars > MAX_EXACT_VARS {
        return Err(UsageError(format!(
            "exact solver handles at most {MAX_EXACT_VARS} variables, instance has {n_vars}"
        ))
        .into());
    }
    create_dir(&cfg.output)?;
    let total_time = cfg.time.seconds(n_vars);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
        .context("cannot start worker pool")?;

    let start = Instant::now();
    let summaries: Vec<RunSummary> = pool.install(|| {
        (0..cfg.runs)
            .into_par_iter()
            .map(|index| execute_run(cfg, &problem, total_time, index))
            .collect::<Result<Vec<_>>>()
    })?;

    let manifest = Manifest {
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        instance_path: cfg
            .instance
            .canonicalize()
            .unwrap_or_else(|_| cfg.instance.clone()),
        instance: problem.info(),
        reference: problem.reference,
        time_budget_seconds: total_time,
        runs: summaries,
        total_wall_time: start.elapsed().as_secs_f64(),
    };
    write_atomic(
        &cfg.output.join(files::HV),
        hv_csv(&manifest.runs, cfg.strategy.as_str()),
    )?;
    write_atomic(
        &cfg.output.join(files::MANIFEST),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(manifest)
}

fn execute_run(
    cfg: &ExperimentConfig,
    problem: &LoadedProblem,
    total_time: f64,
    index: usize,
) -> Result<RunSummary> {
    let start = Instant::now();
    let seed = cfg.run_seed(index);
    let mut run_cfg = RunConfig::new(cfg.strategy, cfg.k, total_time, cfg.n_top, seed);
    run_cfg.sweeps_per_iteration = cfg.sweeps_per_iteration;
    run_cfg.penalty_override = cfg.penalty;
    run_cfg.sld_literal = cfg.sld_literal;
    run_cfg.admit_infeasible = cfg.admit_infeasible;
    run_cfg.gap_space = if cfg.raw_gap_space {
        GapSpace::Raw
    } else {
        GapSpace::Normalised
    };

    let enc = &problem.encoding;
    let feasible = |x: &BitVector| is_feasible(x, enc).map(|r| r.feasible).unwrap_or(false);
    let bi = BiObjectiveQubo {
        first: &problem.qubos.risk,
        second: &problem.qubos.neg_return,
        constraint: &problem.qubos.constraint,
        feasible: &feasible,
    };
    let solver: &dyn QuboSolver = match cfg.solver {
        SolverKind::Anneal => &SimulatedAnnealer,
        SolverKind::Exact => &ExactSolver,
    };
    let outcome =
        run_sbda(&bi, &run_cfg, solver).with_context(|| format!("run {index} (seed {seed})"))?;

    let dir = run_dir(&cfg.output, index);
    create_dir(&dir)?;
    write_atomic(&dir.join(files::FRONT), outcome.front.to_csv())?;
    let mut log = String::new();
    for rec in &outcome.records {
        log.push_str(&serde_json::to_string(rec)?);
        log.push('\n');
    }
    write_atomic(&dir.join(files::LOG), log)?;

    let mut portfolios = Vec::with_capacity(outcome.front.len());
    let decoded: Vec<_> = outcome
        .front
        .entries()
        .iter()
        .map(|e| decode(&e.bits, &problem.instance, enc))
        .collect::<sbda_core::Result<_>>()?;
    for (e, d) in outcome.front.entries().iter().zip(&decoded) {
        portfolios.push(PortfolioRecord {
            f1: e.point.f1,
            f2: e.point.f2,
            bits_hex: e.bits.to_hex(),
            feasible: feasible(&e.bits),
            portfolio: d,
        });
    }
    write_atomic(
        &dir.join(files::PORTFOLIOS),
        serde_json::to_string_pretty(&portfolios)?,
    )?;

    let points = outcome.front.points();
    let summary = RunSummary {
        run: index,
        seed,
        hypervolume: hypervolume_2d(&points, &problem.reference),
        count: outcome.front.front_count(cfg.count_duplicates),
        archived: outcome.archived,
        wall_time: start.elapsed().as_secs_f64(),
    };
    info!(
        "run {index}: hypervolume {:.6e}, {} non-dominated",
        summary.hypervolume, summary.count
    );
    Ok(summary)
}

/// `run,method,hypervolume,count` rows followed by `mean` and `stdev` rows.
pub fn hv_csv(runs: &[RunSummary], method: &str) -> String {
    let mut out = String::from("run,method,hypervolume,count\n");
    for r in runs {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.run, method, r.hypervolume, r.count
        ));
    }
    let hv: Vec<f64> = runs.iter().map(|r| r.hypervolume).collect();
    let counts: Vec<f64> = runs.iter().map(|r| r.count as f64).collect();
    let (hv_mean, hv_sd) = mean_stdev(&hv);
    let (c_mean, c_sd) = mean_stdev(&counts);
    out.push_str(&format!("mean,{method},{hv_mean},{c_mean}\n"));
    out.push_str(&format!("stdev,{method},{hv_sd},{c_sd}\n"));
    out
}

/// Mean and sample standard deviation of the per-run hypervolumes.
pub fn hypervolume_stats(manifest: &Manifest) -> (f64, f64) {
    let hv: Vec<f64> = manifest.runs.iter().map(|r| r.hypervolume).collect();
    mean_stdev(&hv)
}

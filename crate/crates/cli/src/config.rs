//! Experiment configuration: built-in defaults, a flat `key = value` file,
//! and command-line overrides, merged in that order of increasing priority.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use sbda_core::Strategy;

use crate::UsageError;

/// Total time budget of one run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeBudget {
    /// Seconds per QUBO variable, written `0.05n`.
    PerVariable(f64),
    Seconds(f64),
}

impl TimeBudget {
    pub fn seconds(self, n_vars: usize) -> f64 {
        match self {
            TimeBudget::PerVariable(c) => c * n_vars as f64,
            TimeBudget::Seconds(s) => s,
        }
    }
}

impl fmt::Display for TimeBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeBudget::PerVariable(c) => write!(f, "{c}n"),
            TimeBudget::Seconds(s) => write!(f, "{s}"),
        }
    }
}

impl FromStr for TimeBudget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (number, per_var) = match s.strip_suffix('n') {
            Some(head) => (head, true),
            None => (s.strip_suffix('s').unwrap_or(s), false),
        };
        let value: f64 = number
            .trim()
            .parse()
            .map_err(|_| format!("invalid time budget `{s}` (expected seconds or e.g. `0.05n`)"))?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(format!("time budget `{s}` must be positive"));
        }
        Ok(if per_var {
            TimeBudget::PerVariable(value)
        } else {
            TimeBudget::Seconds(value)
        })
    }
}

impl Serialize for TimeBudget {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TimeBudget {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    /// Simulated annealing.
    #[default]
    Anneal,
    /// Exhaustive enumeration (at most 24 variables).
    Exact,
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "anneal" => Ok(SolverKind::Anneal),
            "exact" => Ok(SolverKind::Exact),
            other => Err(format!(
                "unknown solver `{other}` (expected anneal or exact)"
            )),
        }
    }
}

/// Everything that determines the output of `sbda run`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub instance: PathBuf,
    pub cardinality: usize,
    pub eps: f64,
    pub delta: f64,
    pub bits_per_asset: usize,
    pub strategy: Strategy,
    pub k: usize,
    pub time: TimeBudget,
    pub sweeps_per_iteration: Option<u64>,
    pub n_top: usize,
    pub runs: usize,
    pub seed: u64,
    pub output: PathBuf,
    /// Worker threads for independent runs; `None` uses every core.
    pub threads: Option<usize>,
    pub solver: SolverKind,
    /// Fixed penalty weight instead of the per-call automatic one.
    pub penalty: Option<f64>,
    pub admit_infeasible: bool,
    pub sld_literal: bool,
    pub count_duplicates: bool,
    pub raw_gap_space: bool,
}

pub const DEFAULT_CARDINALITY: usize = 10;
pub const DEFAULT_EPS: f64 = 0.01;
pub const DEFAULT_DELTA: f64 = 1.0;
pub const DEFAULT_BITS: usize = 8;
pub const DEFAULT_K: usize = 10;
pub const DEFAULT_N_TOP: usize = 1000;
pub const DEFAULT_RUNS: usize = 20;
pub const DEFAULT_TIME: TimeBudget = TimeBudget::PerVariable(0.05);

/// Values given on the command line; `None`/`false` defers to the file.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// Instance file (mean/stddev/correlation benchmark format).
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Number of assets to select.
    #[arg(short = 'K', long)]
    pub cardinality: Option<usize>,
    /// Minimum weight of a selected asset.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Maximum weight of a selected asset.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Bits per asset (one selection bit plus value bits).
    #[arg(long = "bits")]
    pub bits_per_asset: Option<usize>,
    /// Weight strategy: random, uniform or iterative.
    #[arg(long)]
    pub strategy: Option<Strategy>,
    /// Number of weights (solver calls) per run.
    #[arg(short = 'k', long)]
    pub k: Option<usize>,
    /// Total time per run: seconds, or `<c>n` for c seconds per variable.
    #[arg(long)]
    pub time: Option<TimeBudget>,
    /// Fixed sweeps per solver call; makes runs deterministic.
    #[arg(long)]
    pub sweeps_per_iteration: Option<u64>,
    /// Best distinct states returned per solver call.
    #[arg(long)]
    pub n_top: Option<usize>,
    /// Independent runs (seeds `seed`, `seed + 1`, ...).
    #[arg(long)]
    pub runs: Option<usize>,
    /// Base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(short = 'o', long = "out")]
    pub output: Option<PathBuf>,
    /// Worker threads for independent runs.
    #[arg(long)]
    pub threads: Option<usize>,
    /// QUBO solver backend.
    #[arg(long, value_enum)]
    pub solver: Option<SolverKind>,
    /// Fixed penalty weight for the constraint matrix.
    #[arg(long)]
    pub penalty: Option<f64>,
    /// Archive infeasible solver outputs as well.
    #[arg(long)]
    pub admit_infeasible: bool,
    /// Uniform weights from SLD(H = k) instead of SLD(H = k - 1).
    #[arg(long)]
    pub sld_literal: bool,
    /// Count duplicate objective points in front sizes.
    #[arg(long)]
    pub count_duplicates: bool,
    /// Measure iterative gaps on unscaled energies.
    #[arg(long)]
    pub raw_gap_space: bool,
}

/// Parsed `key = value` file. Blank lines and `#` comments are ignored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, (usize, String)>,
}

const KEYS: &[&str] = &[
    "instance",
    "cardinality",
    "eps",
    "delta",
    "bits_per_asset",
    "strategy",
    "k",
    "time",
    "sweeps_per_iteration",
    "n_top",
    "runs",
    "seed",
    "output",
    "threads",
    "solver",
    "penalty",
    "admit_infeasible",
    "sld_literal",
    "count_duplicates",
    "raw_gap_space",
];

fn canonical_key(key: &str) -> Option<&'static str> {
    let key = match key {
        "K" => "cardinality",
        "bits" => "bits_per_asset",
        "out" => "output",
        "s_type" => "strategy",
        other => other,
    };
    let key = key.replace('-', "_");
    KEYS.iter().copied().find(|k| *k == key)
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, UsageError> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                UsageError(format!("config line {line_no}: expected `key = value`"))
            })?;
            let key = canonical_key(key.trim()).ok_or_else(|| {
                UsageError(format!(
                    "config line {line_no}: unknown key `{}`",
                    key.trim()
                ))
            })?;
            values.insert(key.to_string(), (line_no, value.trim().to_string()));
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        Ok(Self::parse(&text)?)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, UsageError>
    where
        T::Err: fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some((line, v)) => v
                .parse()
                .map(Some)
                .map_err(|e| UsageError(format!("config line {line}: bad value for `{key}`: {e}"))),
        }
    }

    fn flag(&self, key: &str) -> Result<bool, UsageError> {
        match self.values.get(key) {
            None => Ok(false),
            Some((line, v)) => match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" => Ok(true),
                "false" | "no" | "0" | "off" => Ok(false),
                _ => Err(UsageError(format!(
                    "config line {line}: `{key}` expects true or false"
                ))),
            },
        }
    }
}

impl ExperimentConfig {
    /// Merges `flags` over `file` over the built-in defaults.
    pub fn resolve(flags: &Overrides, file: &ConfigFile) -> Result<Self, UsageError> {
        let instance = match flags.instance.clone().or(file.get("instance")?) {
            Some(p) => p,
            None => {
                return Err(UsageError(
                    "no instance given (use --instance or `instance =`)".into(),
                ))
            }
        };
        let cfg = ExperimentConfig {
            instance,
            cardinality: pick(
                flags.cardinality,
                file.get("cardinality")?,
                DEFAULT_CARDINALITY,
            ),
            eps: pick(flags.eps, file.get("eps")?, DEFAULT_EPS),
            delta: pick(flags.delta, file.get("delta")?, DEFAULT_DELTA),
            bits_per_asset: pick(
                flags.bits_per_asset,
                file.get("bits_per_asset")?,
                DEFAULT_BITS,
            ),
            strategy: pick(flags.strategy, file.get("strategy")?, Strategy::Iterative),
            k: pick(flags.k, file.get("k")?, DEFAULT_K),
            time: pick(flags.time, file.get("time")?, DEFAULT_TIME),
            sweeps_per_iteration: flags
                .sweeps_per_iteration
                .or(file.get("sweeps_per_iteration")?),
            n_top: pick(flags.n_top, file.get("n_top")?, DEFAULT_N_TOP),
            runs: pick(flags.runs, file.get("runs")?, DEFAULT_RUNS),
            seed: pick(flags.seed, file.get("seed")?, 0),
            output: pick(
                flags.output.clone(),
                file.get("output")?,
                PathBuf::from("sbda-out"),
            ),
            threads: flags.threads.or(file.get("threads")?),
            solver: pick(flags.solver, file.get("solver")?, SolverKind::Anneal),
            penalty: flags.penalty.or(file.get("penalty")?),
            admit_infeasible: flags.admit_infeasible || file.flag("admit_infeasible")?,
            sld_literal: flags.sld_literal || file.flag("sld_literal")?,
            count_duplicates: flags.count_duplicates || file.flag("count_duplicates")?,
            raw_gap_space: flags.raw_gap_space || file.flag("raw_gap_space")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        let fail = |m: String| Err(UsageError(m));
        if self.runs == 0 {
            return fail("runs must be at least 1".into());
        }
        if self.k < 2 {
            return fail(format!(
                "k = {} but at least 2 weights are required",
                self.k
            ));
        }
        if self.n_top == 0 {
            return fail("n_top must be at least 1".into());
        }
        if self.sweeps_per_iteration == Some(0) {
            return fail("sweeps_per_iteration must be at least 1".into());
        }
        if self.threads == Some(0) {
            return fail("threads must be at least 1".into());
        }
        if let Some(p) = self.penalty {
            if !(p > 0.0 && p.is_finite()) {
                return fail(format!("penalty {p} must be positive"));
            }
        }
        Ok(())
    }

    /// Seed of run `index`.
    pub fn run_seed(&self, index: usize) -> u64 {
        self.seed.wrapping_add(index as u64)
    }
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

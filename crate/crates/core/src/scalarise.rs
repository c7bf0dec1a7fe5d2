//! Scalarisation-based bi-objective QUBO solving.
//!
//! A run performs `k` scalarised solver calls. The first two always optimise
//! each objective alone, `λ = (0, 1)` and then `λ = (1, 0)`, on the unscaled
//! matrices; they seed the per-objective bounds used to rescale `B` and `D`
//! for every later call. The remaining weights are either precomputed
//! (random or simplex lattice, "static" mode) or chosen one at a time by
//! bisecting the widest gap of the front found so far ("iterative" mode).
//!
//! Every call solves `Q = λ1·R + λ2·S + α·G`, with `α` from
//! [`momc_penalty`] unless overridden, and archives the returned states
//! under their unscaled objective values.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use log::{debug, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annealer::{QuboSolver, SolverParams, SolverResult};
use crate::error::{Error, Result};
use crate::pareto::{manhattan, Archive, ArchiveEntry, ObjectivePoint, Provenance};
use crate::qubo::{BitVector, QuboMatrix};
use crate::weights::{random_weight, random_weights, sld_weights, WeightSet};

/// How the non-extreme weights are generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Random,
    Uniform,
    Iterative,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Random, Strategy::Uniform, Strategy::Iterative];

    pub fn is_static(self) -> bool {
        !matches!(self, Strategy::Iterative)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Uniform => "uniform",
            Strategy::Iterative => "iterative",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(Strategy::Random),
            "uniform" => Ok(Strategy::Uniform),
            "iterative" => Ok(Strategy::Iterative),
            other => Err(Error::InvalidConfig(format!("unknown strategy `{other}`"))),
        }
    }
}

/// Space in which gap distances between neighbouring solutions are measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapSpace {
    /// Each objective mapped to `[0, 1]` by the current bounds.
    #[default]
    Normalised,
    /// Unscaled energies.
    Raw,
}

/// Lower and upper bounds on the unscaled energies of both objectives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsTracker {
    pub lb: [f64; 2],
    pub ub: [f64; 2],
}

impl Default for BoundsTracker {
    fn default() -> Self {
        BoundsTracker {
            lb: [f64::INFINITY; 2],
            ub: [f64::NEG_INFINITY; 2],
        }
    }
}

impl BoundsTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_initialised(&self) -> bool {
        self.lb.iter().chain(&self.ub).all(|v| v.is_finite())
    }

    pub fn update(&mut self, e1: f64, e2: f64) {
        for (axis, e) in [e1, e2].into_iter().enumerate() {
            self.lb[axis] = self.lb[axis].min(e);
            self.ub[axis] = self.ub[axis].max(e);
        }
    }

    pub fn updated(mut self, e1: f64, e2: f64) -> Self {
        self.update(e1, e2);
        self
    }

    pub fn span(&self, axis: usize) -> f64 {
        self.ub[axis] - self.lb[axis]
    }

    /// `(f - LB) / (UB - LB)` per axis; an axis without a usable span is left
    /// unscaled.
    pub fn normalise(&self, p: &ObjectivePoint) -> ObjectivePoint {
        let norm = |axis: usize, v: f64| {
            let span = self.span(axis);
            if span.is_finite() && span > 0.0 {
                (v - self.lb[axis]) / span
            } else {
                v
            }
        };
        ObjectivePoint::new(norm(0, p.f1), norm(1, p.f2))
    }

    /// Rescale factors `max(UB) / (UB_i - LB_i)`, or `None` when a span is
    /// degenerate or the numerator is not positive.
    pub fn rescale_factors(&self) -> Option<(f64, f64)> {
        if !self.is_initialised() {
            return None;
        }
        let top = self.ub[0].max(self.ub[1]);
        if top <= 0.0 {
            return None;
        }
        let factor = |axis: usize| {
            let span = self.span(axis);
            (span > 0.0 && span > 1e-15 * self.ub[axis].abs()).then(|| top / span)
        };
        Some((factor(0)?, factor(1)?))
    }
}

/// Rescaled objective matrices, or the originals when the bounds cannot
/// support a rescale (logged as a warning).
pub fn rescale(
    b: &QuboMatrix,
    d: &QuboMatrix,
    tracker: &BoundsTracker,
) -> (QuboMatrix, QuboMatrix, bool) {
    match tracker.rescale_factors() {
        Some((c1, c2)) => (b.scaled(c1), d.scaled(c2), true),
        None => {
            warn!(
                "degenerate bounds lb={:?} ub={:?}; objectives left unscaled",
                tracker.lb, tracker.ub
            );
            (b.clone(), d.clone(), false)
        }
    }
}

/// Penalty weight `α = M / C`.
///
/// `M = max_i Σ_j |q_ij|` bounds the objective change of any single flip.
/// `C` is the coefficient quantum of `G`: the largest `g` such that every
/// coefficient is an integer multiple of `g`. Every difference between two
/// energies of `G`, in particular any positive decrease from an infeasible
/// state, is a multiple of `g`; for the portfolio penalties it is attained.
pub fn momc_penalty(q_obj: &QuboMatrix, g: &QuboMatrix) -> Result<f64> {
    let c = constraint_quantum(g)?;
    let m = q_obj.max_flip_bound();
    Ok((m / c).max(1e-9))
}

pub fn constraint_quantum(g: &QuboMatrix) -> Result<f64> {
    let coeffs: Vec<f64> = g.upper_triplets().map(|(_, _, v)| v.abs()).collect();
    let largest = coeffs.iter().copied().fold(0.0, f64::max);
    if largest <= 0.0 {
        return Err(Error::MalformedConstraint(
            "all coefficients are zero".into(),
        ));
    }
    let tol = 1e-9 * largest;
    let quantum = coeffs
        .iter()
        .copied()
        .reduce(|a, b| float_gcd(a, b, tol))
        .unwrap_or(0.0);
    if quantum <= tol {
        return Err(Error::MalformedConstraint(
            "coefficients share no common quantum".into(),
        ));
    }
    Ok(quantum)
}

fn float_gcd(a: f64, b: f64, tol: f64) -> f64 {
    let (mut a, mut b) = (a.max(b), a.min(b));
    while b > tol {
        let mut r = a % b;
        if b - r <= tol {
            r = 0.0;
        }
        a = b;
        b = r;
    }
    a
}

/// One entry of the weight → best solution map.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSolution {
    pub weights: WeightSet,
    pub bits: BitVector,
    pub point: ObjectivePoint,
}

/// Weight → best solution map, kept in ascending order of λ1.
#[derive(Clone, Debug, Default)]
pub struct WeightSolutionMap {
    entries: Vec<WeightedSolution>,
}

impl WeightSolutionMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, entry: WeightedSolution) {
        let at = self
            .entries
            .partition_point(|e| e.weights.lambda1() <= entry.weights.lambda1());
        self.entries.insert(at, entry);
    }

    pub fn entries(&self) -> &[WeightedSolution] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Why an iteration used the weight it did.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightChoice {
    /// One of the two single-objective runs.
    Extreme,
    /// Taken from the precomputed list.
    Precomputed,
    /// Midpoint of the pair `(pair, pair + 1)` of the λ1-sorted map.
    Gap { pair: usize, distance: f64 },
    /// No unused midpoint was available.
    Random,
}

/// The widest gap whose midpoint weight is unused: `(pair index, distance,
/// midpoint)`. Zero-width gaps never qualify and ties keep the lowest index.
pub fn widest_gap(
    map: &WeightSolutionMap,
    used: &HashSet<i64>,
    tracker: &BoundsTracker,
    space: GapSpace,
) -> Option<(usize, f64, WeightSet)> {
    let project = |p: &ObjectivePoint| match space {
        GapSpace::Normalised => tracker.normalise(p),
        GapSpace::Raw => *p,
    };
    let mut best: Option<(usize, f64, WeightSet)> = None;
    let mut max_d = 0.0;
    for (j, pair) in map.entries().windows(2).enumerate() {
        let d = manhattan(&project(&pair[0].point), &project(&pair[1].point));
        let mid = pair[0].weights.midpoint(&pair[1].weights);
        if d > max_d && !used.contains(&mid.key()) {
            max_d = d;
            best = Some((j, d, mid));
        }
    }
    best
}

/// Next weight in iterative mode: the midpoint of the widest unused gap, or
/// a random weight (retrying up to 100 draws for an unused one).
pub fn next_iterative_weight<R: rand::Rng + ?Sized>(
    map: &WeightSolutionMap,
    used: &HashSet<i64>,
    tracker: &BoundsTracker,
    space: GapSpace,
    rng: &mut R,
) -> Result<(WeightSet, WeightChoice)> {
    if map.len() < 2 {
        return Err(Error::InvalidWeights(format!(
            "need at least two solved weights, have {}",
            map.len()
        )));
    }
    if let Some((pair, distance, mid)) = widest_gap(map, used, tracker, space) {
        return Ok((mid, WeightChoice::Gap { pair, distance }));
    }
    let mut draw = random_weight(rng);
    for _ in 1..100 {
        if !used.contains(&draw.key()) {
            break;
        }
        draw = random_weight(rng);
    }
    Ok((draw, WeightChoice::Random))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Number of scalarised solver calls, at least 2.
    pub k: usize,
    /// Total wall-clock budget in seconds, split evenly over the `k` calls.
    pub total_time: f64,
    pub n_top: usize,
    pub strategy: Strategy,
    pub seed: u64,
    pub penalty_override: Option<f64>,
    /// Fixed sweeps per call instead of wall-clock budgets.
    pub sweeps_per_iteration: Option<u64>,
    pub gap_space: GapSpace,
    /// Uniform weights from `SLD(H = k)` instead of `SLD(H = k - 1)`.
    pub sld_literal: bool,
    /// Archive infeasible solver outputs too.
    pub admit_infeasible: bool,
}

impl RunConfig {
    pub fn new(strategy: Strategy, k: usize, total_time: f64, n_top: usize, seed: u64) -> Self {
        RunConfig {
            k,
            total_time,
            n_top,
            strategy,
            seed,
            penalty_override: None,
            sweeps_per_iteration: None,
            gap_space: GapSpace::Normalised,
            sld_literal: false,
            admit_infeasible: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidConfig(format!(
                "k = {} but at least 2 weights are required",
                self.k
            )));
        }
        if self.n_top == 0 {
            return Err(Error::InvalidConfig("n_top must be positive".into()));
        }
        if self.sweeps_per_iteration.is_none()
            && (self.total_time <= 0.0 || !self.total_time.is_finite())
        {
            return Err(Error::InvalidConfig(format!(
                "time budget {} must be positive",
                self.total_time
            )));
        }
        if let Some(alpha) = self.penalty_override {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "penalty {alpha} must be positive"
                )));
            }
        }
        Ok(())
    }

    /// Solver seed for iteration `i`, decorrelated from the run seed.
    pub fn iteration_seed(&self, iteration: usize) -> u64 {
        splitmix64(self.seed ^ splitmix64(iteration as u64))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476B_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The full weight sequence of a static run, extremes first.
pub fn static_weights(cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Result<Vec<WeightSet>> {
    let mut weights = vec![WeightSet::second_only(), WeightSet::first_only()];
    let rest = cfg.k - 2;
    match cfg.strategy {
        Strategy::Random => weights.extend(random_weights(rest, rng)),
        Strategy::Uniform => {
            let h = if cfg.sld_literal { cfg.k } else { cfg.k - 1 };
            let lattice = sld_weights(h, 2)?;
            weights.extend(lattice[1..lattice.len() - 1].iter().take(rest).copied());
        }
        Strategy::Iterative => {
            return Err(Error::InvalidConfig(
                "iterative weights are not precomputed".into(),
            ))
        }
    }
    Ok(weights)
}

/// JSON log line for one solver call.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub lambda: [f64; 2],
    pub choice: WeightChoice,
    pub alpha: f64,
    /// Bounds in force when the weight was chosen and the objectives
    /// rescaled; `None` while not yet established.
    pub bounds: Option<BoundsTracker>,
    pub rescaled: bool,
    pub solver_time: f64,
    pub sweeps: u64,
    pub best_energy_scalarised: f64,
    pub best_point_unscaled: ObjectivePoint,
    /// Point recorded in the weight → solution map.
    pub map_point: ObjectivePoint,
    pub returned_count: usize,
    pub feasible_count: usize,
}

/// Result of [`run_sbda`].
#[derive(Clone, Debug)]
pub struct SbdaOutcome {
    /// Deduplicated non-dominated archive.
    pub front: Archive,
    /// Size of the archive before filtering.
    pub archived: usize,
    pub records: Vec<IterationRecord>,
    pub bounds: BoundsTracker,
    pub map: WeightSolutionMap,
}

/// The matrices of a bi-objective QUBO and the admission test for archived
/// states.
pub struct BiObjectiveQubo<'a> {
    pub first: &'a QuboMatrix,
    pub second: &'a QuboMatrix,
    pub constraint: &'a QuboMatrix,
    pub feasible: &'a (dyn Fn(&BitVector) -> bool + Sync),
}

impl BiObjectiveQubo<'_> {
    fn point(&self, x: &BitVector) -> ObjectivePoint {
        ObjectivePoint::new(
            self.first.energy_unchecked(x.as_slice()),
            self.second.energy_unchecked(x.as_slice()),
        )
    }
}

struct CallOutput {
    alpha: f64,
    rescaled: bool,
    result: SolverResult,
}

fn solve_one(
    problem: &BiObjectiveQubo<'_>,
    cfg: &RunConfig,
    solver: &dyn QuboSolver,
    iteration: usize,
    weights: WeightSet,
    scaled: Option<(&QuboMatrix, &QuboMatrix, bool)>,
) -> Result<CallOutput> {
    let (r, s, rescaled) = scaled.unwrap_or((problem.first, problem.second, false));
    let objective = QuboMatrix::aggregate(r, s, problem.constraint, weights, 0.0)?;
    let alpha = match cfg.penalty_override {
        Some(a) => a,
        None => momc_penalty(&objective, problem.constraint)?,
    };
    let q = QuboMatrix::aggregate(r, s, problem.constraint, weights, alpha)?;
    let mut params = SolverParams::with_time(
        cfg.total_time / cfg.k as f64,
        cfg.n_top,
        cfg.iteration_seed(iteration),
    );
    params.sweeps_hint = cfg.sweeps_per_iteration;
    let result = solver.solve(&q, &params)?;
    if result.solutions.is_empty() {
        return Err(Error::InvalidParams("solver returned no solutions".into()));
    }
    Ok(CallOutput {
        alpha,
        rescaled,
        result,
    })
}

struct Coordinator<'p, 'a> {
    problem: &'p BiObjectiveQubo<'a>,
    cfg: &'p RunConfig,
    archive: Archive,
    bounds: BoundsTracker,
    map: WeightSolutionMap,
    used: HashSet<i64>,
    records: Vec<IterationRecord>,
}

impl<'p, 'a> Coordinator<'p, 'a> {
    fn absorb(
        &mut self,
        iteration: usize,
        weights: WeightSet,
        choice: WeightChoice,
        bounds_at_choice: BoundsTracker,
        out: CallOutput,
    ) {
        let start = Instant::now();
        let mut feasible_count = 0;
        let mut map_pick: Option<(BitVector, ObjectivePoint)> = None;
        let best = &out.result.solutions[0];
        let best_point = self.problem.point(&best.bits);
        for sol in &out.result.solutions {
            let point = self.problem.point(&sol.bits);
            let feasible = (self.problem.feasible)(&sol.bits);
            if feasible {
                feasible_count += 1;
            }
            if !(feasible || self.cfg.admit_infeasible) {
                continue;
            }
            if map_pick.is_none() {
                map_pick = Some((sol.bits.clone(), point));
            }
            self.bounds.update(point.f1, point.f2);
            self.archive.push(ArchiveEntry {
                bits: sol.bits.clone(),
                point,
                provenance: Provenance { iteration, weights },
            });
        }
        let excluded = out.result.solutions.len() - feasible_count;
        if excluded > 0 && !self.cfg.admit_infeasible {
            debug!("iteration {iteration}: {excluded} infeasible solutions excluded");
        }
        let (bits, point) = map_pick.unwrap_or_else(|| (best.bits.clone(), best_point));
        self.map.insert(WeightedSolution {
            weights,
            bits,
            point,
        });
        self.used.insert(weights.key());
        self.records.push(IterationRecord {
            iteration,
            lambda: [weights.lambda1(), weights.lambda2()],
            choice,
            alpha: out.alpha,
            bounds: bounds_at_choice
                .is_initialised()
                .then_some(bounds_at_choice),
            rescaled: out.rescaled,
            solver_time: out.result.elapsed + start.elapsed().as_secs_f64(),
            sweeps: out.result.sweeps_done,
            best_energy_scalarised: best.energy,
            best_point_unscaled: best_point,
            map_point: point,
            returned_count: out.result.solutions.len(),
            feasible_count,
        });
    }
}

/// Runs the full scalarisation loop and returns the non-dominated archive.
pub fn run_sbda(
    problem: &BiObjectiveQubo<'_>,
    cfg: &RunConfig,
    solver: &dyn QuboSolver,
) -> Result<SbdaOutcome> {
    cfg.validate()?;
    let n = problem.first.n();
    for m in [problem.second, problem.constraint] {
        if m.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.n(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let precomputed = if cfg.strategy.is_static() {
        static_weights(cfg, &mut rng)?
    } else {
        vec![WeightSet::second_only(), WeightSet::first_only()]
    };

    let mut co = Coordinator {
        problem,
        cfg,
        archive: Archive::new(),
        bounds: BoundsTracker::new(),
        map: WeightSolutionMap::new(),
        used: HashSet::new(),
        records: Vec::with_capacity(cfg.k),
    };
    let tag = |iteration: usize| {
        move |e: Error| Error::Iteration {
            iteration,
            source: Box::new(e),
        }
    };

    for (idx, &w) in precomputed.iter().take(2).enumerate() {
        let iteration = idx + 1;
        let bounds = co.bounds;
        let out = solve_one(problem, cfg, solver, iteration, w, None).map_err(tag(iteration))?;
        co.absorb(iteration, w, WeightChoice::Extreme, bounds, out);
    }

    if cfg.strategy.is_static() {
        // Bounds freeze after the extremes so the remaining calls are
        // independent and can run concurrently.
        let frozen = co.bounds;
        let (r, s, rescaled) = rescale(problem.first, problem.second, &frozen);
        let outputs: Vec<Result<CallOutput>> = precomputed[2..]
            .par_iter()
            .enumerate()
            .map(|(offset, &w)| {
                let iteration = offset + 3;
                solve_one(problem, cfg, solver, iteration, w, Some((&r, &s, rescaled)))
                    .map_err(tag(iteration))
            })
            .collect();
        for (offset, out) in outputs.into_iter().enumerate() {
            let w = precomputed[offset + 2];
            co.absorb(offset + 3, w, WeightChoice::Precomputed, frozen, out?);
        }
    } else {
        for iteration in 3..=cfg.k {
            let bounds = co.bounds;
            let (r, s, rescaled) = rescale(problem.first, problem.second, &bounds);
            let (w, choice) =
                next_iterative_weight(&co.map, &co.used, &bounds, cfg.gap_space, &mut rng)
                    .map_err(tag(iteration))?;
            let out = solve_one(problem, cfg, solver, iteration, w, Some((&r, &s, rescaled)))
                .map_err(tag(iteration))?;
            co.absorb(iteration, w, choice, bounds, out);
        }
    }

    let archived = co.archive.len();
    Ok(SbdaOutcome {
        front: co.archive.finalise(),
        archived,
        records: co.records,
        bounds: co.bounds,
        map: co.map,
    })
}

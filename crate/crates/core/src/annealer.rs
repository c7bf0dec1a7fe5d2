//! Time-limited simulated annealing for QUBO, plus an exhaustive solver for
//! small instances.
//!
//! Both solvers keep the `n_top` lowest-energy distinct states they visit.

use std::collections::{BinaryHeap, HashSet};
use std::time::Instant;

use ordered_float::OrderedFloat;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{BitVector, QuboMatrix};

/// Largest instance [`ExactSolver`] accepts.
pub const MAX_EXACT_VARS: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    /// Wall-clock budget in seconds; ignored when `sweeps_hint` is set.
    pub time_limit: f64,
    pub n_top: usize,
    pub seed: u64,
    /// Defaults to the largest single-flip energy change bound.
    pub initial_temperature: Option<f64>,
    /// Defaults to a scale derived from greedy local minima; see
    /// [`SimulatedAnnealer::default_schedule`].
    pub final_temperature: Option<f64>,
    /// Fixed number of sweeps, replacing the wall-clock budget.
    pub sweeps_hint: Option<u64>,
}

impl SolverParams {
    pub fn with_time(time_limit: f64, n_top: usize, seed: u64) -> Self {
        SolverParams {
            time_limit,
            n_top,
            seed,
            initial_temperature: None,
            final_temperature: None,
            sweeps_hint: None,
        }
    }

    pub fn with_sweeps(sweeps: u64, n_top: usize, seed: u64) -> Self {
        SolverParams {
            sweeps_hint: Some(sweeps),
            ..Self::with_time(0.0, n_top, seed)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_top == 0 {
            return Err(Error::InvalidParams("n_top must be at least 1".into()));
        }
        match self.sweeps_hint {
            Some(0) => return Err(Error::InvalidParams("sweeps_hint must be positive".into())),
            None if !(self.time_limit > 0.0 && self.time_limit.is_finite()) => {
                return Err(Error::InvalidParams(format!(
                    "time limit {} must be positive without a sweep count",
                    self.time_limit
                )))
            }
            _ => {}
        }
        for t in [self.initial_temperature, self.final_temperature]
            .into_iter()
            .flatten()
        {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "temperature {t} must be positive"
                )));
            }
        }
        if let (Some(hot), Some(cold)) = (self.initial_temperature, self.final_temperature) {
            if cold > hot {
                return Err(Error::InvalidParams(format!(
                    "final temperature {cold} above initial {hot}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub bits: BitVector,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    /// Ascending energy, pairwise distinct, at most `n_top` long.
    pub solutions: Vec<Solution>,
    pub sweeps_done: u64,
    pub elapsed: f64,
}

impl SolverResult {
    pub fn best(&self) -> Option<&Solution> {
        self.solutions.first()
    }
}

/// Anything that can stand in for one scalarised solver call.
pub trait QuboSolver: Sync {
    fn solve(&self, q: &QuboMatrix, params: &SolverParams) -> Result<SolverResult>;
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Ranked {
    energy: OrderedFloat<f64>,
    bits: BitVector,
}

/// Bounded set of the lowest-energy distinct states seen so far.
#[derive(Debug)]
pub struct BestList {
    capacity: usize,
    heap: BinaryHeap<Ranked>,
    members: HashSet<BitVector>,
}

impl BestList {
    pub fn new(capacity: usize) -> Self {
        BestList {
            capacity,
            heap: BinaryHeap::with_capacity(capacity + 1),
            members: HashSet::with_capacity(capacity + 1),
        }
    }

    /// Whether a state of this energy could currently enter the list.
    #[inline]
    pub fn admits(&self, energy: f64) -> bool {
        self.heap.len() < self.capacity
            || self
                .heap
                .peek()
                .is_some_and(|worst| energy < worst.energy.0)
    }

    pub fn offer(&mut self, energy: f64, bits: &[u8]) {
        if !self.admits(energy) {
            return;
        }
        let candidate = BitVector::from_bools(bits.iter().map(|&b| b != 0));
        if self.members.contains(&candidate) {
            return;
        }
        self.members.insert(candidate.clone());
        self.heap.push(Ranked {
            energy: OrderedFloat(energy),
            bits: candidate,
        });
        if self.heap.len() > self.capacity {
            if let Some(evicted) = self.heap.pop() {
                self.members.remove(&evicted.bits);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Energies recomputed from scratch, then sorted by `(energy, bits)`.
    pub fn into_solutions(self, q: &QuboMatrix) -> Vec<Solution> {
        let mut out: Vec<Solution> = self
            .heap
            .into_iter()
            .map(|r| Solution {
                energy: q.energy_unchecked(r.bits.as_slice()),
                bits: r.bits,
            })
            .collect();
        out.sort_by(|a, b| {
            a.energy
                .total_cmp(&b.energy)
                .then_with(|| a.bits.cmp(&b.bits))
        });
        out
    }
}

/// Single-flip Metropolis annealing with geometric cooling.
///
/// One sweep proposes every variable once in a fresh random order. With a
/// wall-clock budget the temperature follows the elapsed fraction of the
/// budget; with `sweeps_hint` it follows the sweep count, which makes the
/// run a pure function of `(Q, seed, sweeps_hint)`. A sweep that accepts
/// nothing reheats to a tenth of the initial temperature (if colder) and
/// cools again over the remaining budget.
#[derive(Clone, Copy, Debug, Default)]
pub struct SimulatedAnnealer;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Schedule {
    pub initial: f64,
    pub final_: f64,
}

impl SimulatedAnnealer {
    /// Hot end: `max_i Σ_j |c_ij|`, which bounds every flip delta. Cold end:
    /// the smaller of `1e-3` of the hot end and the smallest positive uphill
    /// delta at a greedy local minimum divided by `ln 100` (so that move is
    /// accepted about 1% of the time).
    pub fn default_schedule(q: &QuboMatrix) -> Schedule {
        let bound = q.max_flip_bound();
        let initial = if bound > 0.0 { bound } else { 1.0 };
        let mut final_ = 1e-3 * initial;
        if let Some(gap) = greedy_min_uphill(q) {
            final_ = final_.min(gap / 100f64.ln());
        }
        Schedule { initial, final_ }
    }

    fn schedule(q: &QuboMatrix, params: &SolverParams) -> Schedule {
        let auto = Self::default_schedule(q);
        let initial = params.initial_temperature.unwrap_or(auto.initial);
        let final_ = params.final_temperature.unwrap_or(auto.final_).min(initial);
        Schedule { initial, final_ }
    }
}

/// Descends greedily from all-zeros and reports the smallest positive flip
/// delta at the local minimum reached.
fn greedy_min_uphill(q: &QuboMatrix) -> Option<f64> {
    let n = q.n();
    let mut x = vec![0u8; n];
    let mut field: Vec<f64> = (0..n).map(|i| q.get(i, i)).collect();
    loop {
        let (i, d) = (0..n)
            .map(|i| (i, if x[i] == 0 { field[i] } else { -field[i] }))
            .min_by(|a, b| a.1.total_cmp(&b.1))?;
        if d >= 0.0 {
            break;
        }
        flip_with_fields(q, &mut x, &mut field, i);
    }
    (0..n)
        .map(|i| if x[i] == 0 { field[i] } else { -field[i] })
        .filter(|&d| d > 0.0)
        .min_by(f64::total_cmp)
}

/// `field[j]` holds `c_jj + Σ_{k≠j} c_jk x_k`, so the delta of flipping `j`
/// is `±field[j]`.
#[inline]
fn flip_with_fields(q: &QuboMatrix, x: &mut [u8], field: &mut [f64], i: usize) {
    let row = q.row(i);
    let sign = if x[i] == 0 { 1.0 } else { -1.0 };
    x[i] ^= 1;
    for (j, (f, &c)) in field.iter_mut().zip(row).enumerate() {
        if j != i {
            *f += sign * c;
        }
    }
}

impl QuboSolver for SimulatedAnnealer {
    fn solve(&self, q: &QuboMatrix, params: &SolverParams) -> Result<SolverResult> {
        params.validate()?;
        let start = Instant::now();
        let n = q.n();
        let schedule = Self::schedule(q, params);
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

        let mut x: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.5))).collect();
        let mut field: Vec<f64> = (0..n)
            .map(|i| {
                let row = q.row(i);
                row[i]
                    + (0..n)
                        .filter(|&j| j != i && x[j] != 0)
                        .map(|j| row[j])
                        .sum::<f64>()
            })
            .collect();
        let mut energy = q.energy_unchecked(&x);
        let mut best = BestList::new(params.n_top);
        best.offer(energy, &x);

        let mut order: Vec<usize> = (0..n).collect();
        let reheat = 0.1 * schedule.initial;
        // Progress in [0, 1] and the temperature segment currently cooling.
        let mut seg_start_progress = 0.0;
        let mut seg_hot = schedule.initial;
        let mut sweeps_done = 0u64;

        loop {
            let progress = match params.sweeps_hint {
                Some(total) => {
                    if sweeps_done >= total {
                        break;
                    }
                    sweeps_done as f64 / total as f64
                }
                None => {
                    let t = start.elapsed().as_secs_f64() / params.time_limit;
                    if t >= 1.0 {
                        break;
                    }
                    t
                }
            };
            let seg_len = 1.0 - seg_start_progress;
            let frac = if seg_len > 0.0 {
                ((progress - seg_start_progress) / seg_len).clamp(0.0, 1.0)
            } else {
                1.0
            };
            let temperature = seg_hot * (schedule.final_ / seg_hot).powf(frac);

            order.shuffle(&mut rng);
            let mut accepted = 0usize;
            for &i in &order {
                let delta = if x[i] == 0 { field[i] } else { -field[i] };
                let accept = delta <= 0.0 || rng.random::<f64>() < (-delta / temperature).exp();
                if accept {
                    flip_with_fields(q, &mut x, &mut field, i);
                    energy += delta;
                    accepted += 1;
                    if best.admits(energy) {
                        best.offer(energy, &x);
                    }
                }
            }
            sweeps_done += 1;

            if accepted == 0 && temperature < reheat {
                seg_start_progress = progress;
                seg_hot = reheat;
            }
            // Guard against drift in the incremental energy.
            if sweeps_done.is_multiple_of(256) {
                energy = q.energy_unchecked(&x);
            }
        }

        Ok(SolverResult {
            solutions: best.into_solutions(q),
            sweeps_done,
            elapsed: start.elapsed().as_secs_f64(),
        })
    }
}

/// Exhaustive Gray-code enumeration; returns the exact `n_top` best states.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactSolver;

impl ExactSolver {
    pub fn enumerate(q: &QuboMatrix, n_top: usize) -> Result<SolverResult> {
        let n = q.n();
        if n > MAX_EXACT_VARS {
            return Err(Error::TooLarge {
                n,
                max: MAX_EXACT_VARS,
            });
        }
        if n_top == 0 {
            return Err(Error::InvalidParams("n_top must be at least 1".into()));
        }
        let start = Instant::now();
        let mut x = vec![0u8; n];
        let mut field: Vec<f64> = (0..n).map(|i| q.get(i, i)).collect();
        let mut energy = q.offset();
        let mut best = BestList::new(n_top);
        best.offer(energy, &x);
        for step in 1u64..(1u64 << n) {
            let i = step.trailing_zeros() as usize;
            energy += if x[i] == 0 { field[i] } else { -field[i] };
            flip_with_fields(q, &mut x, &mut field, i);
            if best.admits(energy) {
                best.offer(energy, &x);
            }
        }
        Ok(SolverResult {
            solutions: best.into_solutions(q),
            sweeps_done: 1,
            elapsed: start.elapsed().as_secs_f64(),
        })
    }
}

impl QuboSolver for ExactSolver {
    fn solve(&self, q: &QuboMatrix, params: &SolverParams) -> Result<SolverResult> {
        Self::enumerate(q, params.n_top)
    }
}

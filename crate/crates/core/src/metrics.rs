//! Front quality indicators: 2-D hypervolume and empirical attainment
//! functions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pareto::{non_dominated_filter, ObjectivePoint};
use crate::qubo::QuboMatrix;

/// Divisor used when reporting portfolio hypervolumes.
pub const HV_REPORT_SCALE: f64 = 1e23;

/// Largest grid [`eaf_grid`] produces.
pub const MAX_EAF_GRID: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoint {
    pub r1: f64,
    pub r2: f64,
}

impl ReferencePoint {
    pub fn new(r1: f64, r2: f64) -> Self {
        ReferencePoint { r1, r2 }
    }

    /// Whether `p` lies inside the reference box.
    pub fn bounds(&self, p: &ObjectivePoint) -> bool {
        p.f1 <= self.r1 && p.f2 <= self.r2
    }
}

/// Sums of the positive coefficients of the two objective matrices.
pub fn default_reference(b: &QuboMatrix, d: &QuboMatrix) -> ReferencePoint {
    ReferencePoint::new(b.positive_coefficient_sum(), d.positive_coefficient_sum())
}

/// Points outside the reference box, which the hypervolume ignores.
pub fn clipped_count(front: &[ObjectivePoint], reference: &ReferencePoint) -> usize {
    front.iter().filter(|p| !reference.bounds(p)).count()
}

/// Area dominated by `front` and bounded by `reference`.
///
/// Points outside the box and dominated points are dropped; the remaining
/// staircase, ascending in `f1`, contributes `Σ_k (r2 - f2_k)(f1_{k+1} - f1_k)`
/// with `f1` after the last point taken as `r1`.
pub fn hypervolume_2d(front: &[ObjectivePoint], reference: &ReferencePoint) -> f64 {
    let inside: Vec<ObjectivePoint> = front
        .iter()
        .copied()
        .filter(|p| reference.bounds(p))
        .collect();
    let mut stair: Vec<ObjectivePoint> = non_dominated_filter(&inside)
        .into_iter()
        .map(|i| inside[i])
        .collect();
    stair.sort_by(|a, b| a.f1.total_cmp(&b.f1));
    let mut area = 0.0;
    for (k, p) in stair.iter().enumerate() {
        let next_f1 = stair.get(k + 1).map_or(reference.r1, |q| q.f1);
        area += (reference.r2 - p.f2) * (next_f1 - p.f1);
    }
    area
}

/// Fraction of runs whose front weakly dominates each grid point.
pub fn eaf(runs: &[Vec<ObjectivePoint>], grid: &[ObjectivePoint]) -> Vec<(ObjectivePoint, f64)> {
    if runs.is_empty() {
        return grid.iter().map(|&g| (g, 0.0)).collect();
    }
    let total = runs.len() as f64;
    grid.par_iter()
        .map(|g| {
            let hits = runs
                .iter()
                .filter(|run| run.iter().any(|p| p.weakly_dominates(g)))
                .count();
            (*g, hits as f64 / total)
        })
        .collect()
}

/// `eaf(a) - eaf(b)` at every grid point.
pub fn eaf_difference(
    runs_a: &[Vec<ObjectivePoint>],
    runs_b: &[Vec<ObjectivePoint>],
    grid: &[ObjectivePoint],
) -> Vec<(ObjectivePoint, f64)> {
    eaf(runs_a, grid)
        .into_iter()
        .zip(eaf(runs_b, grid))
        .map(|((g, pa), (_, pb))| (g, pa - pb))
        .collect()
}

/// Cartesian product of the distinct coordinates appearing in any run, the
/// points where the empirical attainment function can change. Axes are
/// subsampled evenly (endpoints kept) when the product exceeds `cap`.
pub fn eaf_grid(runs: &[&[ObjectivePoint]], cap: usize) -> Vec<ObjectivePoint> {
    let mut xs: Vec<f64> = runs.iter().flat_map(|r| r.iter().map(|p| p.f1)).collect();
    let mut ys: Vec<f64> = runs.iter().flat_map(|r| r.iter().map(|p| p.f2)).collect();
    for axis in [&mut xs, &mut ys] {
        axis.sort_by(f64::total_cmp);
        axis.dedup();
    }
    if xs.len() * ys.len() > cap {
        let side = ((cap as f64).sqrt().floor() as usize).max(2);
        xs = subsample(&xs, side);
        ys = subsample(&ys, side);
    }
    xs.iter()
        .flat_map(|&x| ys.iter().map(move |&y| ObjectivePoint::new(x, y)))
        .collect()
}

fn subsample(values: &[f64], target: usize) -> Vec<f64> {
    if values.len() <= target {
        return values.to_vec();
    }
    let last = values.len() - 1;
    let mut out: Vec<f64> = (0..target)
        .map(|k| values[(k * last + (target - 1) / 2) / (target - 1)])
        .collect();
    out.dedup();
    out
}

/// Boundary of the region attained by at least `level` of the runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttainmentSurface {
    pub level: usize,
    /// Ascending `f1`, strictly descending `f2`.
    pub staircase: Vec<ObjectivePoint>,
}

impl AttainmentSurface {
    /// Whether `p` lies in the attained region.
    pub fn attains(&self, p: &ObjectivePoint) -> bool {
        self.staircase.iter().any(|s| s.weakly_dominates(p))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("f1,f2\n");
        for p in &self.staircase {
            out.push_str(&format!("{},{}\n", p.f1, p.f2));
        }
        out
    }
}

/// Level 1 is the best-case surface, `level = runs` the worst case.
pub fn attainment_surface(runs: &[Vec<ObjectivePoint>], level: usize) -> Result<AttainmentSurface> {
    if level == 0 || level > runs.len() {
        return Err(Error::InvalidConfig(format!(
            "attainment level {level} outside 1..={}",
            runs.len()
        )));
    }
    // Per run: points ascending in f1 with the running minimum of f2.
    let prepared: Vec<(Vec<f64>, Vec<f64>)> = runs
        .iter()
        .map(|run| {
            let mut pts = run.clone();
            pts.sort_by(|a, b| a.f1.total_cmp(&b.f1));
            let mut best = f64::INFINITY;
            let prefix = pts
                .iter()
                .map(|p| {
                    best = best.min(p.f2);
                    best
                })
                .collect();
            (pts.iter().map(|p| p.f1).collect(), prefix)
        })
        .collect();

    let mut xs: Vec<f64> = runs.iter().flat_map(|r| r.iter().map(|p| p.f1)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let mut staircase = Vec::new();
    let mut last = f64::INFINITY;
    let mut column = Vec::with_capacity(runs.len());
    for &x in &xs {
        column.clear();
        column.extend(prepared.iter().map(|(f1s, prefix)| {
            let count = f1s.partition_point(|&v| v <= x);
            if count == 0 {
                f64::INFINITY
            } else {
                prefix[count - 1]
            }
        }));
        column.sort_by(f64::total_cmp);
        let y = column[level - 1];
        if y < last {
            staircase.push(ObjectivePoint::new(x, y));
            last = y;
        }
    }
    Ok(AttainmentSurface { level, staircase })
}

/// Mean and sample standard deviation.
pub fn mean_stdev(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

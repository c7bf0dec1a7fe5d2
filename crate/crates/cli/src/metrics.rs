//! `sbda metrics`: recomputes indicators from stored fronts.

use std::collections::HashSet;
use std::path::Path;

use anyhow::{bail, Result};

use sbda_core::metrics::MAX_EAF_GRID;
use sbda_core::{eaf, eaf_grid, hypervolume_2d, ObjectivePoint};

use crate::files::{self, points_csv, read_front, run_dir, write_atomic};
use crate::run::{hv_csv, LoadedProblem, Manifest, RunSummary};

/// Relative tolerance when checking stored objective values.
const POINT_TOLERANCE: f64 = 1e-9;

/// Re-derives every front point from its stored bit string, then rewrites
/// `hv.csv` and `eaf.csv` in `dir`. Returns the recomputed per-run rows.
pub fn cmd_metrics(dir: &Path, count_duplicates: Option<bool>) -> Result<Vec<RunSummary>> {
    let manifest = Manifest::load(dir)?;
    let mut cfg = manifest.config.clone();
    if manifest.instance_path.exists() {
        cfg.instance = manifest.instance_path.clone();
    }
    let problem = LoadedProblem::load(&cfg)?;
    if problem.info() != manifest.instance {
        bail!(
            "instance {} no longer matches the manifest",
            cfg.instance.display()
        );
    }
    let count_duplicates = count_duplicates.unwrap_or(cfg.count_duplicates);
    let fronts = load_verified_fronts(dir, &manifest, &problem)?;

    let mut rows = Vec::with_capacity(fronts.len());
    for (run, points) in manifest.runs.iter().zip(&fronts) {
        let distinct: HashSet<(u64, u64)> = points
            .iter()
            .map(|p| (p.f1.to_bits(), p.f2.to_bits()))
            .collect();
        rows.push(RunSummary {
            count: if count_duplicates {
                points.len()
            } else {
                distinct.len()
            },
            hypervolume: hypervolume_2d(points, &problem.reference),
            ..run.clone()
        });
    }
    write_atomic(&dir.join(files::HV), hv_csv(&rows, cfg.strategy.as_str()))?;

    let views: Vec<&[ObjectivePoint]> = fronts.iter().map(Vec::as_slice).collect();
    let grid = eaf_grid(&views, MAX_EAF_GRID);
    write_atomic(
        &dir.join(files::EAF),
        points_csv("prob", &eaf(&fronts, &grid)),
    )?;
    Ok(rows)
}

/// Front points of every run listed in the manifest, recomputed from the
/// bit strings and checked against the stored values.
fn load_verified_fronts(
    dir: &Path,
    manifest: &Manifest,
    problem: &LoadedProblem,
) -> Result<Vec<Vec<ObjectivePoint>>> {
    let n = problem.n_vars();
    let mut fronts = Vec::with_capacity(manifest.runs.len());
    for run in &manifest.runs {
        let path = run_dir(dir, run.run).join(files::FRONT);
        let mut points = Vec::new();
        for row in read_front(&path)? {
            let bits = row.bits(n)?;
            let p = ObjectivePoint::new(
                problem.qubos.risk.energy(&bits)?,
                problem.qubos.neg_return.energy(&bits)?,
            );
            if !close(p.f1, row.point.f1) || !close(p.f2, row.point.f2) {
                bail!(
                    "{}: stored point ({}, {}) disagrees with recomputed ({}, {})",
                    path.display(),
                    row.point.f1,
                    row.point.f2,
                    p.f1,
                    p.f2
                );
            }
            points.push(p);
        }
        fronts.push(points);
    }
    Ok(fronts)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= POINT_TOLERANCE * a.abs().max(b.abs()) + 1e-15
}

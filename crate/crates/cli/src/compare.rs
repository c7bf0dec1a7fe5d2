//! `sbda compare`: empirical attainment differences between two run
//! directories on the same instance.

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};

use sbda_core::metrics::MAX_EAF_GRID;
use sbda_core::{attainment_surface, eaf_difference, eaf_grid, ObjectivePoint};

use crate::files::{self, create_dir, points_csv, read_front, run_dir, write_atomic};
use crate::run::Manifest;
use crate::UsageError;

#[derive(Clone, Debug)]
pub struct CompareOptions {
    /// Attainment levels to export; default `1`, the median and `runs`.
    pub levels: Option<Vec<usize>>,
    pub grid_cap: usize,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            levels: None,
            grid_cap: MAX_EAF_GRID,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareSummary {
    pub grid_points: usize,
    /// Largest `eaf(a) - eaf(b)` and smallest, over the grid.
    pub max_diff: f64,
    pub min_diff: f64,
    pub written: Vec<PathBuf>,
}

/// Stored front points of every run in `dir`.
pub fn load_fronts(dir: &Path) -> Result<(Manifest, Vec<Vec<ObjectivePoint>>)> {
    if !dir.is_dir() {
        bail!("run directory {} does not exist", dir.display());
    }
    let manifest = Manifest::load(dir)?;
    let fronts = manifest
        .runs
        .iter()
        .map(|r| {
            let rows = read_front(&run_dir(dir, r.run).join(files::FRONT))?;
            Ok(rows.into_iter().map(|row| row.point).collect())
        })
        .collect::<Result<Vec<Vec<ObjectivePoint>>>>()?;
    Ok((manifest, fronts))
}

/// Writes `eafdiff.csv` plus `a/surface_L.csv` and `b/surface_L.csv` for
/// each level into `out`.
pub fn cmd_compare(
    a: &Path,
    b: &Path,
    out: &Path,
    opts: &CompareOptions,
) -> Result<CompareSummary> {
    let (ma, fa) = load_fronts(a)?;
    let (mb, fb) = load_fronts(b)?;
    if ma.instance != mb.instance || ma.reference != mb.reference {
        bail!(
            "manifest mismatch: {} and {} were run on different instances or encodings",
            a.display(),
            b.display()
        );
    }
    create_dir(out)?;
    let mut written = Vec::new();

    let views: Vec<&[ObjectivePoint]> = fa.iter().chain(&fb).map(Vec::as_slice).collect();
    let grid = eaf_grid(&views, opts.grid_cap);
    let diff = eaf_difference(&fa, &fb, &grid);
    let path = out.join(files::EAF_DIFF);
    write_atomic(&path, points_csv("diff", &diff))?;
    written.push(path);

    for (label, fronts) in [("a", &fa), ("b", &fb)] {
        let sub = out.join(label);
        create_dir(&sub)?;
        for level in levels_for(opts, fronts.len())? {
            let surface = attainment_surface(fronts, level)?;
            let path = sub.join(format!("surface_{level}.csv"));
            write_atomic(&path, surface.to_csv())?;
            written.push(path);
        }
    }

    let values = diff.iter().map(|(_, d)| *d);
    Ok(CompareSummary {
        grid_points: grid.len(),
        max_diff: values.clone().fold(0.0, f64::max),
        min_diff: values.fold(0.0, f64::min),
        written,
    })
}

fn levels_for(opts: &CompareOptions, runs: usize) -> Result<Vec<usize>> {
    if runs == 0 {
        return Ok(Vec::new());
    }
    let mut levels = match &opts.levels {
        Some(given) => {
            if let Some(bad) = given.iter().find(|&&l| l == 0 || l > runs) {
                return Err(
                    UsageError(format!("attainment level {bad} outside 1..={runs}")).into(),
                );
            }
            given.clone()
        }
        None => vec![1, runs.div_ceil(2), runs],
    };
    levels.sort_unstable();
    levels.dedup();
    Ok(levels)
}

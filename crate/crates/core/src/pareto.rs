//! Bi-objective dominance, filtering and the solution archive.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::qubo::BitVector;
use crate::weights::WeightSet;

/// `(risk, negated return)`, both minimised.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectivePoint {
    pub f1: f64,
    pub f2: f64,
}

impl ObjectivePoint {
    pub fn new(f1: f64, f2: f64) -> Self {
        ObjectivePoint { f1, f2 }
    }

    /// Weak Pareto dominance with at least one strict improvement.
    pub fn dominates(&self, other: &ObjectivePoint) -> bool {
        dominates(self, other)
    }

    /// `a ≤ b` in both coordinates.
    pub fn weakly_dominates(&self, other: &ObjectivePoint) -> bool {
        self.f1 <= other.f1 && self.f2 <= other.f2
    }

    fn lexicographic(&self, other: &ObjectivePoint) -> Ordering {
        self.f1
            .total_cmp(&other.f1)
            .then_with(|| self.f2.total_cmp(&other.f2))
    }
}

pub fn dominates(a: &ObjectivePoint, b: &ObjectivePoint) -> bool {
    a.f1 <= b.f1 && a.f2 <= b.f2 && (a.f1 < b.f1 || a.f2 < b.f2)
}

pub fn manhattan(a: &ObjectivePoint, b: &ObjectivePoint) -> f64 {
    (a.f1 - b.f1).abs() + (a.f2 - b.f2).abs()
}

/// Indices (ascending) of points no other point dominates. Identical points
/// do not dominate each other, so duplicates on the front are all kept.
///
/// Sorts by `(f1, f2)` and sweeps the running minimum of `f2`.
pub fn non_dominated_filter(points: &[ObjectivePoint]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].lexicographic(&points[b]));

    let mut keep = Vec::new();
    // Smallest f2 among points with strictly smaller f1.
    let mut best_before = f64::INFINITY;
    let mut start = 0;
    while start < order.len() {
        let f1 = points[order[start]].f1;
        let mut end = start;
        while end < order.len() && points[order[end]].f1 == f1 {
            end += 1;
        }
        // Within a run of equal f1 the first entry has the smallest f2.
        let group_min = points[order[start]].f2;
        if group_min < best_before {
            keep.extend(
                order[start..end]
                    .iter()
                    .copied()
                    .take_while(|&i| points[i].f2 == group_min),
            );
            best_before = group_min;
        }
        start = end;
    }
    keep.sort_unstable();
    keep
}

/// Where an archived solution came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub iteration: usize,
    pub weights: WeightSet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArchiveEntry {
    pub bits: BitVector,
    pub point: ObjectivePoint,
    pub provenance: Provenance,
}

/// Unbounded store of candidate solutions; [`Archive::finalise`] reduces it
/// to the deduplicated non-dominated subset.
#[derive(Clone, Debug, Default)]
pub struct Archive {
    entries: Vec<ArchiveEntry>,
}

impl Archive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: ArchiveEntry) {
        self.entries.push(entry);
    }

    pub fn extend<I: IntoIterator<Item = ArchiveEntry>>(&mut self, entries: I) {
        self.entries.extend(entries);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn points(&self) -> Vec<ObjectivePoint> {
        self.entries.iter().map(|e| e.point).collect()
    }

    /// Keeps the first occurrence of each bit pattern, drops dominated
    /// entries, and orders the rest by `(f1, f2, bits)`.
    pub fn finalise(self) -> Archive {
        let mut seen = HashSet::new();
        let unique: Vec<ArchiveEntry> = self
            .entries
            .into_iter()
            .filter(|e| seen.insert(e.bits.clone()))
            .collect();
        let points: Vec<ObjectivePoint> = unique.iter().map(|e| e.point).collect();
        let keep = non_dominated_filter(&points);
        let mut slots: Vec<Option<ArchiveEntry>> = unique.into_iter().map(Some).collect();
        let mut entries: Vec<ArchiveEntry> =
            keep.into_iter().filter_map(|i| slots[i].take()).collect();
        entries.sort_by(|a, b| {
            a.point
                .lexicographic(&b.point)
                .then_with(|| a.bits.cmp(&b.bits))
        });
        Archive { entries }
    }

    /// Number of distinct objective points.
    pub fn distinct_point_count(&self) -> usize {
        let keys: HashSet<(u64, u64)> = self
            .entries
            .iter()
            .map(|e| (e.point.f1.to_bits(), e.point.f2.to_bits()))
            .collect();
        keys.len()
    }

    /// Front size under the chosen counting rule: distinct objective points,
    /// or distinct bit patterns when `count_duplicates` is set.
    pub fn front_count(&self, count_duplicates: bool) -> usize {
        if count_duplicates {
            self.entries.len()
        } else {
            self.distinct_point_count()
        }
    }

    /// CSV with header `f1,f2,iteration,lambda1,lambda2,bits_hex`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("f1,f2,iteration,lambda1,lambda2,bits_hex\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.point.f1,
                e.point.f2,
                e.provenance.iteration,
                e.provenance.weights.lambda1(),
                e.provenance.weights.lambda2(),
                e.bits.to_hex()
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(f1: f64, f2: f64) -> ObjectivePoint {
        ObjectivePoint::new(f1, f2)
    }

    pub(crate) fn quadratic_filter(points: &[ObjectivePoint]) -> Vec<usize> {
        (0..points.len())
            .filter(|&i| !points.iter().any(|q| dominates(q, &points[i])))
            .collect()
    }

    #[test]
    fn dominance_cases() {
        assert!(dominates(&p(0.0, 0.0), &p(1.0, 1.0)));
        assert!(!dominates(&p(0.0, 1.0), &p(1.0, 0.0)));
        assert!(!dominates(&p(1.0, 0.0), &p(0.0, 1.0)));
        assert!(!dominates(&p(1.0, 1.0), &p(1.0, 1.0)));
        assert!(dominates(&p(1.0, 0.0), &p(1.0, 1.0)));
    }

    #[test]
    fn filter_hand_case() {
        assert!(non_dominated_filter(&[]).is_empty());
        let pts = [p(0.0, 2.0), p(1.0, 1.0), p(2.0, 0.0), p(1.5, 1.5)];
        assert_eq!(non_dominated_filter(&pts), vec![0, 1, 2]);
    }

    #[test]
    fn filter_keeps_duplicates() {
        let pts = [p(1.0, 1.0), p(1.0, 1.0), p(1.0, 2.0), p(0.5, 3.0)];
        assert_eq!(non_dominated_filter(&pts), vec![0, 1, 3]);
    }

    #[test]
    fn filter_matches_quadratic_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            // Coarse integer grid so ties and duplicates occur.
            let pts: Vec<ObjectivePoint> = (0..1000)
                .map(|_| {
                    p(
                        rng.random_range(0..60) as f64,
                        rng.random_range(0..60) as f64,
                    )
                })
                .collect();
            assert_eq!(non_dominated_filter(&pts), quadratic_filter(&pts));
        }
    }

    #[test]
    fn manhattan_cases() {
        assert_eq!(manhattan(&p(3.0, 4.0), &p(3.0, 4.0)), 0.0);
        assert_eq!(manhattan(&p(0.0, 0.0), &p(1.0, 2.0)), 3.0);
    }

    proptest! {
        #[test]
        fn manhattan_is_a_metric(a in (-1e3..1e3f64, -1e3..1e3f64),
                                 b in (-1e3..1e3f64, -1e3..1e3f64),
                                 c in (-1e3..1e3f64, -1e3..1e3f64)) {
            let (a, b, c) = (p(a.0, a.1), p(b.0, b.1), p(c.0, c.1));
            prop_assert_eq!(manhattan(&a, &b), manhattan(&b, &a));
            prop_assert!(manhattan(&a, &c) <= manhattan(&a, &b) + manhattan(&b, &c) + 1e-9);
        }

        #[test]
        fn filter_is_idempotent(raw in prop::collection::vec((0u8..30, 0u8..30), 0..200)) {
            let pts: Vec<ObjectivePoint> = raw.iter().map(|&(a, b)| p(a as f64, b as f64)).collect();
            let first = non_dominated_filter(&pts);
            let front: Vec<ObjectivePoint> = first.iter().map(|&i| pts[i]).collect();
            let second = non_dominated_filter(&front);
            prop_assert_eq!(second, (0..front.len()).collect::<Vec<_>>());
            prop_assert_eq!(first, quadratic_filter(&pts));
        }
    }

    fn entry(bits: u64, f1: f64, f2: f64) -> ArchiveEntry {
        ArchiveEntry {
            bits: BitVector::from_index(bits, 4),
            point: p(f1, f2),
            provenance: Provenance {
                iteration: 1,
                weights: WeightSet::first_only(),
            },
        }
    }

    #[test]
    fn archive_finalise_dedupes_and_filters() {
        let mut a = Archive::new();
        a.push(entry(1, 1.0, 1.0));
        a.push(entry(1, 1.0, 1.0));
        a.push(entry(2, 1.0, 1.0));
        a.push(entry(3, 2.0, 2.0));
        a.push(entry(4, 0.0, 5.0));
        let f = a.finalise();
        assert_eq!(f.len(), 3);
        assert_eq!(f.front_count(false), 2);
        assert_eq!(f.front_count(true), 3);
        assert_eq!(f.entries()[0].point, p(0.0, 5.0));
        let csv = f.to_csv();
        assert!(csv.starts_with("f1,f2,iteration,lambda1,lambda2,bits_hex\n0,5,1,1,0,4\n"));
    }
}

//! Shared fixtures for the benchmarks under `benches/`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sbda_core::{
    build_qubos, momc_penalty, non_dominated_filter, EncodingScheme, ObjectivePoint,
    PortfolioInstance, QuboMatrix, WeightSet,
};

/// Dense QUBO with coefficients uniform in `[-1, 1)`.
pub fn random_qubo(n: usize, seed: u64) -> QuboMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    QuboMatrix::from_dense(n, &full).expect("valid dimensions")
}

/// Penalised scalarised portfolio QUBO on a synthetic market with the
/// standard encoding (8 bits per asset).
pub fn portfolio_qubo(n_assets: usize, lambda1: f64) -> QuboMatrix {
    let inst = PortfolioInstance::synthetic("bench", n_assets, 1);
    let enc = EncodingScheme::standard(n_assets).expect("standard encoding");
    let q = build_qubos(&inst, &enc).expect("consistent encoding");
    let w = WeightSet::new(lambda1).expect("weight in range");
    let objective =
        QuboMatrix::aggregate(&q.risk, &q.neg_return, &q.constraint, w, 0.0).expect("same size");
    let alpha = momc_penalty(&objective, &q.constraint).expect("portfolio constraint");
    QuboMatrix::aggregate(&q.risk, &q.neg_return, &q.constraint, w, alpha).expect("same size")
}

/// `n` uniform points in the unit square.
pub fn random_points(n: usize, seed: u64) -> Vec<ObjectivePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| ObjectivePoint::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)))
        .collect()
}

/// A mutually non-dominated set of exactly `n` points on a convex curve.
pub fn convex_front(n: usize) -> Vec<ObjectivePoint> {
    let front: Vec<ObjectivePoint> = (0..n)
        .map(|i| {
            let t = (i as f64 + 0.5) / n as f64;
            ObjectivePoint::new(t, (1.0 - t).powi(2))
        })
        .collect();
    debug_assert_eq!(non_dominated_filter(&front).len(), n);
    front
}

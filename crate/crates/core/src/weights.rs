//! Scalarisation weight pairs and the precomputed weight generators.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bi-objective weight pair `(λ1, λ2)` with `λ1 + λ2 = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSet {
    lambda1: f64,
    lambda2: f64,
}

impl WeightSet {
    /// Tolerance on `λ1 + λ2 = 1`.
    pub const SUM_TOLERANCE: f64 = 1e-12;

    /// `(λ1, 1 - λ1)`.
    pub fn new(lambda1: f64) -> Result<Self> {
        Self::from_pair(lambda1, 1.0 - lambda1)
    }

    pub fn from_pair(lambda1: f64, lambda2: f64) -> Result<Self> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        if !in_unit(lambda1) || !in_unit(lambda2) {
            return Err(Error::InvalidWeights(format!(
                "({lambda1}, {lambda2}) outside [0, 1]"
            )));
        }
        if (lambda1 + lambda2 - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::InvalidWeights(format!(
                "({lambda1}, {lambda2}) does not sum to 1"
            )));
        }
        Ok(WeightSet { lambda1, lambda2 })
    }

    /// Only the risk objective: `(1, 0)`.
    pub fn first_only() -> Self {
        WeightSet {
            lambda1: 1.0,
            lambda2: 0.0,
        }
    }

    /// Only the return objective: `(0, 1)`.
    pub fn second_only() -> Self {
        WeightSet {
            lambda1: 0.0,
            lambda2: 1.0,
        }
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    /// Componentwise mean of two weight pairs.
    pub fn midpoint(&self, other: &WeightSet) -> WeightSet {
        WeightSet {
            lambda1: 0.5 * (self.lambda1 + other.lambda1),
            lambda2: 0.5 * (self.lambda2 + other.lambda2),
        }
    }

    /// Identity used for "already used" checks: λ1 rounded to 12 decimals.
    pub fn key(&self) -> i64 {
        (self.lambda1 * 1e12).round() as i64
    }
}

impl fmt::Display for WeightSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lambda1, self.lambda2)
    }
}

/// `count` pairs with `λ1 ~ U[0, 1]` and `λ2 = 1 - λ1`.
pub fn random_weights<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<WeightSet> {
    (0..count).map(|_| random_weight(rng)).collect()
}

pub fn random_weight<R: Rng + ?Sized>(rng: &mut R) -> WeightSet {
    let lambda1: f64 = rng.random();
    WeightSet {
        lambda1,
        lambda2: 1.0 - lambda1,
    }
}

/// Simplex lattice design with `h` divisions; only `m = 2` objectives are
/// supported. Returns `h + 1` weights ascending in λ1.
pub fn sld_weights(h: usize, m: usize) -> Result<Vec<WeightSet>> {
    if m != 2 {
        return Err(Error::InvalidWeights(format!(
            "simplex lattice with {m} objectives is unsupported; only 2"
        )));
    }
    if h == 0 {
        return Err(Error::InvalidWeights("simplex lattice needs h >= 1".into()));
    }
    Ok((0..=h)
        .map(|j| {
            let lambda1 = j as f64 / h as f64;
            WeightSet {
                lambda1,
                lambda2: (h - j) as f64 / h as f64,
            }
        })
        .collect())
}

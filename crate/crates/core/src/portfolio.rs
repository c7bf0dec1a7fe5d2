//! Cardinality-constrained mean-variance portfolio instances and their QUBO
//! encoding.
//!
//! Each asset owns `d` consecutive binary variables: one selection bit `z_i`
//! followed by `d - 1` value bits forming the integer `v_i = Σ_b 2^b x_{i,b}`.
//! The held proportion is
//!
//! ```text
//! w_i = ε·z_i + (δ - ε)·v_i / (2^(d-1) - 1)
//! ```
//!
//! The risk matrix `B` and the negated-return matrix `D` evaluate exactly to
//! `Σ w_i w_j σ_ij` and `-Σ w_i μ_i` of these bit-level weights. The
//! constraint matrix `G` is the sum of three non-negative penalties:
//!
//! * cardinality `(Σ z_i - K)²`;
//! * budget `((Σ v_i - T) / T)²`, where `T` is the value-bit total that puts
//!   `Σ w_i` nearest to 1 once exactly `K` assets are selected;
//! * coupling `Σ x_{i,b}(1 - z_i)`, which zeroes value bits of unselected
//!   assets.
//!
//! The penalties' constants live in the matrix offset so `G` reads 0 on
//! feasible assignments. The per-asset bit layout reconstructs the encoding
//! from the reported variable counts (8 bits per asset); it is not a
//! verbatim copy of any published representation.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{BitVector, QuboBuilder, QuboMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct PortfolioInstance {
    pub name: String,
    pub mu: Vec<f64>,
    /// Row-major `n_assets × n_assets` covariance.
    pub sigma: Vec<f64>,
}

impl PortfolioInstance {
    pub fn n_assets(&self) -> usize {
        self.mu.len()
    }

    #[inline]
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        self.sigma[i * self.n_assets() + j]
    }

    /// Parses the OR-Library portfolio format: the asset count, one
    /// `mean stddev` line per asset, then `i j correlation` lines with 1-based
    /// indices. Missing pairs have zero correlation.
    pub fn parse_orlib(name: &str, text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let err = |line: usize, message: String| Error::Parse { line, message };

        let (line, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        let n: usize = header
            .parse()
            .map_err(|_| err(line, format!("bad asset count `{header}`")))?;
        if n == 0 {
            return Err(err(line, "asset count must be positive".into()));
        }

        let mut mu = Vec::with_capacity(n);
        let mut sd = Vec::with_capacity(n);
        for k in 0..n {
            let (line, content) = lines
                .next()
                .ok_or_else(|| err(line + k + 1, format!("expected {n} asset lines, got {k}")))?;
            let fields = parse_floats(content)
                .filter(|f| f.len() == 2)
                .ok_or_else(|| err(line, format!("expected `mean stddev`, got `{content}`")))?;
            if !fields.iter().all(|v| v.is_finite()) || fields[1] < 0.0 {
                return Err(err(line, format!("invalid asset statistics `{content}`")));
            }
            mu.push(fields[0]);
            sd.push(fields[1]);
        }

        let mut sigma = vec![0.0; n * n];
        for i in 0..n {
            sigma[i * n + i] = sd[i] * sd[i];
        }
        for (line, content) in lines {
            let fields: Vec<&str> = content.split_whitespace().collect();
            let bad = || err(line, format!("expected `i j correlation`, got `{content}`"));
            if fields.len() != 3 {
                return Err(bad());
            }
            let i: usize = fields[0].parse().map_err(|_| bad())?;
            let j: usize = fields[1].parse().map_err(|_| bad())?;
            let corr: f64 = fields[2].parse().map_err(|_| bad())?;
            if i == 0 || j == 0 || i > n || j > n {
                return Err(err(line, format!("asset index ({i}, {j}) outside 1..={n}")));
            }
            if !(-1.0..=1.0).contains(&corr) {
                return Err(err(line, format!("correlation {corr} outside [-1, 1]")));
            }
            let (i, j) = (i - 1, j - 1);
            if i != j {
                let cov = corr * sd[i] * sd[j];
                sigma[i * n + j] = cov;
                sigma[j * n + i] = cov;
            }
        }
        Ok(PortfolioInstance {
            name: name.to_string(),
            mu,
            sigma,
        })
    }

    /// Renders the instance back to the OR-Library layout. Covariances are
    /// written as correlations for every pair `i <= j`.
    pub fn to_orlib(&self) -> String {
        let n = self.n_assets();
        let sd: Vec<f64> = (0..n).map(|i| self.covariance(i, i).sqrt()).collect();
        let mut out = format!("{n}\n");
        for (mu, sd) in self.mu.iter().zip(&sd) {
            let _ = writeln!(out, "{mu} {sd}");
        }
        for i in 0..n {
            for j in i..n {
                let corr = if i == j || sd[i] == 0.0 || sd[j] == 0.0 {
                    if i == j {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    self.covariance(i, j) / (sd[i] * sd[j])
                };
                let _ = writeln!(out, "{} {} {}", i + 1, j + 1, corr);
            }
        }
        out
    }

    /// A reproducible market of `n_assets` assets with one-factor
    /// correlations. Statistics are quantised to six decimals so the
    /// OR-Library rendering round-trips.
    pub fn synthetic(name: &str, n_assets: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let round6 = |v: f64| (v * 1e6).round() / 1e6;
        let sd: Vec<f64> = (0..n_assets)
            .map(|_| round6(rng.random_range(0.02..0.09)))
            .collect();
        let loading: Vec<f64> = (0..n_assets).map(|_| rng.random_range(0.3..0.9)).collect();
        let mu: Vec<f64> = sd
            .iter()
            .map(|&s| round6(0.12 * s * rng.random_range(0.2..1.0) - 0.001))
            .collect();
        let mut sigma = vec![0.0; n_assets * n_assets];
        for i in 0..n_assets {
            for j in 0..n_assets {
                let corr = if i == j {
                    1.0
                } else {
                    round6(loading[i] * loading[j])
                };
                sigma[i * n_assets + j] = corr * sd[i] * sd[j];
            }
        }
        PortfolioInstance {
            name: name.to_string(),
            mu,
            sigma,
        }
    }
}

fn parse_floats(line: &str) -> Option<Vec<f64>> {
    line.split_whitespace().map(|t| t.parse().ok()).collect()
}

/// Role of a variable within its asset's block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BitRole {
    Selection,
    Value(usize),
}

/// Binary layout and constraint parameters shared by all assets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodingScheme {
    /// Required number of selected assets `K`.
    pub cardinality: usize,
    /// Minimum proportion of a selected asset.
    pub eps: f64,
    /// Maximum proportion of a selected asset.
    pub delta: f64,
    /// Bits per asset: one selection bit plus `bits_per_asset - 1` value bits.
    pub bits_per_asset: usize,
    n_assets: usize,
}

impl EncodingScheme {
    pub fn new(
        n_assets: usize,
        cardinality: usize,
        eps: f64,
        delta: f64,
        bits_per_asset: usize,
    ) -> Result<Self> {
        let fail = |m: String| Err(Error::InvalidEncoding(m));
        if bits_per_asset < 2 {
            return fail(format!(
                "need a selection bit and at least one value bit, got {bits_per_asset} bits"
            ));
        }
        if bits_per_asset > 32 {
            return fail(format!("{bits_per_asset} bits per asset is too many"));
        }
        if n_assets == 0 || cardinality == 0 || cardinality > n_assets {
            return fail(format!("cardinality {cardinality} with {n_assets} assets"));
        }
        if !(eps > 0.0 && eps < 1.0 && delta > eps && delta <= 1.0) {
            return fail(format!(
                "need 0 < eps < delta <= 1, got eps={eps}, delta={delta}"
            ));
        }
        let k = cardinality as f64;
        if eps * k > 1.0 || delta * k < 1.0 {
            return fail(format!(
                "budget unreachable: eps*K = {}, delta*K = {}",
                eps * k,
                delta * k
            ));
        }
        Ok(EncodingScheme {
            cardinality,
            eps,
            delta,
            bits_per_asset,
            n_assets,
        })
    }

    /// `K = 10`, `ε = 0.01`, `δ = 1`, eight bits per asset.
    pub fn standard(n_assets: usize) -> Result<Self> {
        Self::new(n_assets, 10.min(n_assets), 0.01, 1.0, 8)
    }

    pub fn n_assets(&self) -> usize {
        self.n_assets
    }

    pub fn n_vars(&self) -> usize {
        self.n_assets * self.bits_per_asset
    }

    pub fn selection_bit(&self, asset: usize) -> usize {
        asset * self.bits_per_asset
    }

    pub fn value_bit(&self, asset: usize, b: usize) -> usize {
        debug_assert!(b + 1 < self.bits_per_asset);
        asset * self.bits_per_asset + 1 + b
    }

    pub fn value_bits(&self) -> usize {
        self.bits_per_asset - 1
    }

    /// Global index of `(asset, role)`.
    pub fn index(&self, asset: usize, role: BitRole) -> usize {
        match role {
            BitRole::Selection => self.selection_bit(asset),
            BitRole::Value(b) => self.value_bit(asset, b),
        }
    }

    /// Inverse of [`EncodingScheme::index`].
    pub fn role(&self, index: usize) -> (usize, BitRole) {
        let asset = index / self.bits_per_asset;
        match index % self.bits_per_asset {
            0 => (asset, BitRole::Selection),
            r => (asset, BitRole::Value(r - 1)),
        }
    }

    /// Largest value integer, `2^(d-1) - 1`.
    pub fn levels(&self) -> u64 {
        (1u64 << (self.bits_per_asset - 1)) - 1
    }

    /// Proportion carried by one unit of the value integer.
    pub fn quantum(&self) -> f64 {
        (self.delta - self.eps) / self.levels() as f64
    }

    /// Value-bit total whose weights sum nearest to 1 with `K` assets held.
    pub fn budget_target(&self) -> u64 {
        let ideal = (1.0 - self.cardinality as f64 * self.eps) / self.quantum();
        let max = self.cardinality as u64 * self.levels();
        (ideal.round().max(0.0) as u64).min(max)
    }

    fn budget_scale(&self) -> f64 {
        self.budget_target().max(1) as f64
    }

    /// Smallest positive energy `G` can take; anything at or below half of
    /// it is treated as zero.
    pub fn feasibility_epsilon(&self) -> f64 {
        0.5 / (self.budget_scale() * self.budget_scale())
    }

    /// Proportion contributed by variable `index` when set, before masking by
    /// the selection bit.
    pub fn bit_weight(&self, index: usize) -> f64 {
        match self.role(index).1 {
            BitRole::Selection => self.eps,
            BitRole::Value(b) => self.quantum() * (1u64 << b) as f64,
        }
    }

    fn check(&self, x: &BitVector) -> Result<()> {
        if x.len() != self.n_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars(),
                found: x.len(),
            });
        }
        Ok(())
    }

    fn value_integer(&self, x: &BitVector, asset: usize) -> u64 {
        (0..self.value_bits())
            .filter(|&b| x.get(self.value_bit(asset, b)))
            .map(|b| 1u64 << b)
            .sum()
    }

    /// Bit-level proportions `ε·z_i + q·v_i`, i.e. what `B` and `D` evaluate.
    /// Unlike [`decode`], value bits of unselected assets still count.
    pub fn raw_weights(&self, x: &BitVector) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok((0..self.n_assets)
            .map(|i| {
                let z = if x.get(self.selection_bit(i)) {
                    self.eps
                } else {
                    0.0
                };
                z + self.quantum() * self.value_integer(x, i) as f64
            })
            .collect())
    }
}

/// The three matrices of a portfolio QUBO.
#[derive(Clone, Debug)]
pub struct PortfolioQubos {
    /// Risk `Σ w_i w_j σ_ij`.
    pub risk: QuboMatrix,
    /// Negated return `-Σ w_i μ_i`.
    pub neg_return: QuboMatrix,
    /// Constraint penalties; zero exactly on feasible assignments (up to
    /// rounding).
    pub constraint: QuboMatrix,
}

pub fn build_qubos(inst: &PortfolioInstance, enc: &EncodingScheme) -> Result<PortfolioQubos> {
    if inst.n_assets() != enc.n_assets() {
        return Err(Error::DimensionMismatch {
            expected: enc.n_assets(),
            found: inst.n_assets(),
        });
    }
    let n_assets = inst.n_assets();
    let d = enc.bits_per_asset;
    let n = enc.n_vars();
    let block = |i: usize| i * d..(i + 1) * d;
    let weight: Vec<f64> = (0..n).map(|k| enc.bit_weight(k)).collect();

    let mut risk = QuboBuilder::new(n);
    for i in 0..n_assets {
        for j in 0..n_assets {
            let cov = inst.covariance(i, j);
            if cov == 0.0 {
                continue;
            }
            for k in block(i) {
                for l in block(j) {
                    risk.add(k, l, cov * weight[k] * weight[l]);
                }
            }
        }
    }

    let mut neg_return = QuboBuilder::new(n);
    for i in 0..n_assets {
        for k in block(i) {
            neg_return.add(k, k, -inst.mu[i] * weight[k]);
        }
    }

    let mut constraint = QuboBuilder::new(n);
    let card = enc.cardinality as f64;
    for i in 0..n_assets {
        let zi = enc.selection_bit(i);
        constraint.add(zi, zi, 1.0 - 2.0 * card);
        for j in i + 1..n_assets {
            constraint.add(zi, enc.selection_bit(j), 2.0);
        }
    }
    constraint.add_offset(card * card);

    let target = enc.budget_target() as f64;
    let scale2 = enc.budget_scale() * enc.budget_scale();
    let value_bits: Vec<(usize, f64)> = (0..n_assets)
        .flat_map(|i| (0..enc.value_bits()).map(move |b| (i, b)))
        .map(|(i, b)| (enc.value_bit(i, b), (1u64 << b) as f64))
        .collect();
    for &(k, ck) in &value_bits {
        constraint.add(k, k, -2.0 * target * ck / scale2);
        for &(l, cl) in &value_bits {
            constraint.add(k, l, ck * cl / scale2);
        }
    }
    constraint.add_offset(target * target / scale2);

    for i in 0..n_assets {
        let zi = enc.selection_bit(i);
        for b in 0..enc.value_bits() {
            let v = enc.value_bit(i, b);
            constraint.add(v, v, 1.0);
            constraint.add(v, zi, -1.0);
        }
    }

    Ok(PortfolioQubos {
        risk: risk.build()?,
        neg_return: neg_return.build()?,
        constraint: constraint.build()?,
    })
}

/// A decoded assignment with orphan value bits masked out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodedPortfolio {
    pub selected: Vec<usize>,
    pub weights: Vec<f64>,
    pub risk: f64,
    #[serde(rename = "return")]
    pub ret: f64,
}

pub fn decode(
    x: &BitVector,
    inst: &PortfolioInstance,
    enc: &EncodingScheme,
) -> Result<DecodedPortfolio> {
    enc.check(x)?;
    if inst.n_assets() != enc.n_assets() {
        return Err(Error::DimensionMismatch {
            expected: enc.n_assets(),
            found: inst.n_assets(),
        });
    }
    let n = inst.n_assets();
    let selected: Vec<usize> = (0..n).filter(|&i| x.get(enc.selection_bit(i))).collect();
    let mut weights = vec![0.0; n];
    for &i in &selected {
        weights[i] = enc.eps + enc.quantum() * enc.value_integer(x, i) as f64;
    }
    Ok(DecodedPortfolio {
        risk: portfolio_risk(inst, &weights),
        ret: weights.iter().zip(&inst.mu).map(|(w, m)| w * m).sum(),
        selected,
        weights,
    })
}

/// `Σ_i Σ_j w_i w_j σ_ij`.
pub fn portfolio_risk(inst: &PortfolioInstance, weights: &[f64]) -> f64 {
    let n = inst.n_assets();
    let mut total = 0.0;
    for i in 0..n {
        if weights[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            total += weights[i] * weights[j] * inst.covariance(i, j);
        }
    }
    total
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// Number of selection bits set.
    pub cardinality: usize,
    /// Value bits set on unselected assets.
    pub orphan_bits: usize,
    /// Sum of the value integers over all assets.
    pub value_total: u64,
    /// `Σ w_i` of the decoded (masked) weights.
    pub budget_sum: f64,
}

/// Exactly `K` assets, no orphan value bits, and the value total on the
/// budget target. With `K` assets held the last condition is the same as
/// `|Σ w_i - 1| <= q/2` for the value quantum `q`.
pub fn is_feasible(x: &BitVector, enc: &EncodingScheme) -> Result<FeasibilityReport> {
    enc.check(x)?;
    let mut cardinality = 0;
    let mut orphan_bits = 0;
    let mut value_total = 0;
    let mut budget_sum = 0.0;
    for i in 0..enc.n_assets() {
        let v = enc.value_integer(x, i);
        value_total += v;
        if x.get(enc.selection_bit(i)) {
            cardinality += 1;
            budget_sum += enc.eps + enc.quantum() * v as f64;
        } else {
            orphan_bits += (0..enc.value_bits())
                .filter(|&b| x.get(enc.value_bit(i, b)))
                .count();
        }
    }
    Ok(FeasibilityReport {
        feasible: cardinality == enc.cardinality
            && orphan_bits == 0
            && value_total == enc.budget_target(),
        cardinality,
        orphan_bits,
        value_total,
        budget_sum,
    })
}

//! Dense QUBO matrices and binary assignments.
//!
//! A [`QuboMatrix`] stores the folded coefficient of every unordered pair
//! `{i, j}`: the entry for `(i, j)` and `(j, i)` of a full matrix are summed
//! into one value and mirrored into both halves of a row-major buffer so that
//! row scans (used by the single-flip delta) stay contiguous. The energy is
//!
//! ```text
//! E(x) = offset + Σ_i c_ii x_i + Σ_{i<j} c_ij x_i x_j
//! ```
//!
//! which equals `xᵀQx + offset` for any full matrix `Q` that folds to `c`.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::WeightSet;

/// A candidate solution: one byte (0 or 1) per binary variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BitVector(Vec<u8>);

impl BitVector {
    pub fn zeros(n: usize) -> Self {
        BitVector(vec![0; n])
    }

    pub fn ones(n: usize) -> Self {
        BitVector(vec![1; n])
    }

    /// Builds from any iterator of truthy values.
    pub fn from_bools<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        BitVector(bits.into_iter().map(u8::from).collect())
    }

    /// Little-endian expansion of `value` into `n` bits (bit `i` is variable `i`).
    pub fn from_index(value: u64, n: usize) -> Self {
        BitVector((0..n).map(|i| ((value >> i) & 1) as u8).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.0[i] != 0
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = u8::from(value);
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.0[i] ^= 1;
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b != 0).count()
    }

    /// Hex rendering, four variables per digit, variable 0 in the lowest bit
    /// of the first digit.
    pub fn to_hex(&self) -> String {
        self.0
            .chunks(4)
            .map(|chunk| {
                let nibble = chunk
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (k, &b)| acc | ((b & 1) << k));
                char::from_digit(u32::from(nibble), 16).unwrap()
            })
            .collect()
    }

    /// Inverse of [`BitVector::to_hex`]; `n` trims the padding of the last digit.
    pub fn from_hex(hex: &str, n: usize) -> Option<Self> {
        let mut bits = Vec::with_capacity(hex.len() * 4);
        for c in hex.chars() {
            let nibble = c.to_digit(16)?;
            for k in 0..4 {
                bits.push(((nibble >> k) & 1) as u8);
            }
        }
        if bits.len() < n || bits.len() >= n + 4 {
            return None;
        }
        if bits[n..].iter().any(|&b| b != 0) {
            return None;
        }
        bits.truncate(n);
        Some(BitVector(bits))
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", b)?;
        }
        Ok(())
    }
}

/// Accumulates coefficients before freezing them into a [`QuboMatrix`].
///
/// `add(i, j, v)` and `add(j, i, v)` are interchangeable; repeated additions
/// to the same pair are summed.
#[derive(Clone, Debug)]
pub struct QuboBuilder {
    n: usize,
    upper: Vec<f64>,
    offset: f64,
}

impl QuboBuilder {
    pub fn new(n: usize) -> Self {
        QuboBuilder {
            n,
            upper: vec![0.0; n * n],
            offset: 0.0,
        }
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) -> &mut Self {
        assert!(
            i < self.n && j < self.n,
            "coefficient ({i}, {j}) outside {}",
            self.n
        );
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.upper[a * self.n + b] += value;
        self
    }

    pub fn add_offset(&mut self, value: f64) -> &mut Self {
        self.offset += value;
        self
    }

    pub fn build(self) -> Result<QuboMatrix> {
        let n = self.n;
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        if !self.offset.is_finite() {
            return Err(Error::NonFinite { row: 0, col: 0 });
        }
        let mut coeffs = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.upper[i * n + j];
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                coeffs[i * n + j] = v;
                coeffs[j * n + i] = v;
            }
        }
        Ok(QuboMatrix {
            n,
            coeffs,
            offset: self.offset,
        })
    }
}

/// Symmetric QUBO with folded pair coefficients and a constant offset.
#[derive(Clone, Debug, PartialEq)]
pub struct QuboMatrix {
    n: usize,
    /// Row-major `n × n`; entry `(i, j)` equals `(j, i)` and holds the full
    /// folded coefficient of the pair.
    coeffs: Vec<f64>,
    offset: f64,
}

impl QuboMatrix {
    /// Folds a full (not necessarily symmetric) row-major matrix.
    pub fn from_dense(n: usize, full: &[f64]) -> Result<Self> {
        if full.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: full.len(),
            });
        }
        let mut builder = QuboBuilder::new(n);
        for i in 0..n {
            for j in 0..n {
                let v = full[i * n + j];
                if v != 0.0 || !v.is_finite() {
                    builder.add(i, j, v);
                }
            }
        }
        builder.build()
    }

    /// Builds from folded `(i, j, value)` triplets; order of `i` and `j` is
    /// irrelevant and duplicates accumulate.
    pub fn from_triplets<I>(n: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut builder = QuboBuilder::new(n);
        for (i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange {
                    index: i.max(j),
                    len: n,
                });
            }
            builder.add(i, j, v);
        }
        builder.build()
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::from_triplets(
            values.len(),
            values.iter().enumerate().map(|(i, &v)| (i, i, v)),
        )
    }

    pub fn zeros(n: usize) -> Result<Self> {
        QuboBuilder::new(n).build()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Folded coefficient of the pair `{i, j}` (the diagonal for `i == j`).
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coeffs[i * self.n + j]
    }

    /// Row `i` of the mirrored folded matrix.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.coeffs[i * self.n..(i + 1) * self.n]
    }

    /// Iterates the stored upper triangle `(i, j, c_ij)` with `i <= j`,
    /// ascending in `i` then `j`, skipping zeros.
    pub fn upper_triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (i..self.n).filter_map(move |j| {
                let v = self.get(i, j);
                (v != 0.0).then_some((i, j, v))
            })
        })
    }

    fn check_len(&self, x: &BitVector) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `xᵀQx + offset`.
    pub fn energy(&self, x: &BitVector) -> Result<f64> {
        self.check_len(x)?;
        Ok(self.energy_unchecked(x.as_slice()))
    }

    pub(crate) fn energy_unchecked(&self, x: &[u8]) -> f64 {
        let n = self.n;
        let mut e = self.offset;
        for i in 0..n {
            if x[i] == 0 {
                continue;
            }
            let row = &self.coeffs[i * n..(i + 1) * n];
            e += row[i];
            for j in i + 1..n {
                if x[j] != 0 {
                    e += row[j];
                }
            }
        }
        e
    }

    /// `energy(flip(x, i)) - energy(x)` in O(n).
    pub fn delta_energy(&self, x: &BitVector, i: usize) -> Result<f64> {
        self.check_len(x)?;
        if i >= self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.n,
            });
        }
        Ok(self.delta_unchecked(x.as_slice(), i))
    }

    #[inline]
    pub(crate) fn delta_unchecked(&self, x: &[u8], i: usize) -> f64 {
        let row = self.row(i);
        let mut field = row[i];
        for (j, (&c, &b)) in row.iter().zip(x).enumerate() {
            if b != 0 && j != i {
                field += c;
            }
        }
        if x[i] == 0 {
            field
        } else {
            -field
        }
    }

    /// Entrywise `λ1·R + λ2·S + α·G`, offsets included.
    pub fn aggregate(
        r: &QuboMatrix,
        s: &QuboMatrix,
        g: &QuboMatrix,
        weights: WeightSet,
        alpha: f64,
    ) -> Result<QuboMatrix> {
        for m in [s, g] {
            if m.n != r.n {
                return Err(Error::DimensionMismatch {
                    expected: r.n,
                    found: m.n,
                });
            }
        }
        let (l1, l2) = (weights.lambda1(), weights.lambda2());
        let coeffs = r
            .coeffs
            .iter()
            .zip(&s.coeffs)
            .zip(&g.coeffs)
            .map(|((&a, &b), &c)| l1 * a + l2 * b + alpha * c)
            .collect();
        Ok(QuboMatrix {
            n: r.n,
            coeffs,
            offset: l1 * r.offset + l2 * s.offset + alpha * g.offset,
        })
    }

    /// Every coefficient and the offset multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> QuboMatrix {
        QuboMatrix {
            n: self.n,
            coeffs: self.coeffs.iter().map(|&c| c * factor).collect(),
            offset: self.offset * factor,
        }
    }

    /// Sum of the positive folded coefficients; the offset is not a
    /// coefficient and is ignored.
    pub fn positive_coefficient_sum(&self) -> f64 {
        self.upper_triplets().map(|(_, _, v)| v.max(0.0)).sum()
    }

    /// Largest possible |energy change| of a single flip: `max_i Σ_j |c_ij|`.
    pub fn max_flip_bound(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|c| c.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Writes the triplet text format: header `n`, an optional
    /// `# offset <v>` line, then `i j value` for every nonzero upper entry.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.n)?;
        if self.offset != 0.0 {
            writeln!(w, "# offset {}", self.offset)?;
        }
        for (i, j, v) in self.upper_triplets() {
            writeln!(w, "{} {} {}", i, j, v)?;
        }
        Ok(())
    }

    /// Parses the format produced by [`QuboMatrix::write_triplets`]. Blank
    /// lines and `#` comments other than `# offset` are ignored.
    pub fn parse_triplets(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (first_line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let n: usize = header.parse().map_err(|_| Error::Parse {
            line: first_line,
            message: format!("bad variable count `{header}`"),
        })?;
        let mut builder = QuboBuilder::new(n);
        for (line, content) in lines {
            if let Some(comment) = content.strip_prefix('#') {
                let mut parts = comment.split_whitespace();
                if parts.next() == Some("offset") {
                    let v = parts
                        .next()
                        .and_then(|t| t.parse::<f64>().ok())
                        .ok_or_else(|| Error::Parse {
                            line,
                            message: "bad offset".into(),
                        })?;
                    builder.add_offset(v);
                }
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let bad = || Error::Parse {
                line,
                message: format!("expected `i j value`, got `{content}`"),
            };
            if fields.len() != 3 {
                return Err(bad());
            }
            let i: usize = fields[0].parse().map_err(|_| bad())?;
            let j: usize = fields[1].parse().map_err(|_| bad())?;
            let v: f64 = fields[2].parse().map_err(|_| bad())?;
            if i >= n || j >= n {
                return Err(Error::Parse {
                    line,
                    message: format!("index ({i}, {j}) outside 0..{n}"),
                });
            }
            if i > j {
                return Err(Error::Parse {
                    line,
                    message: format!("expected i <= j, got ({i}, {j})"),
                });
            }
            builder.add(i, j, v);
        }
        builder.build()
    }
}

/// Upper-triangle energy evaluation from a full matrix; kept independent of
/// [`QuboMatrix`] storage for cross-checks.
pub fn energy_full(n: usize, full: &[f64], x: &BitVector) -> f64 {
    let mut e = 0.0;
    for i in 0..n {
        for j in 0..n {
            if x.get(i) && x.get(j) {
                e += full[i * n + j];
            }
        }
    }
    e
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_matrix_csv, write_matrix_csv};

/// Per-row nearest-neighbour ordering of a finite space.
///
/// `rank(i, t) = m` means `t` is the `m`'th closest point to `i`, counting
/// `i` itself as rank 1. Rows are normally permutations of `1..=n`; a matrix
/// built with [`RankMatrix::with_ties`] may repeat a rank within a row, which
/// marks points at equal distance (competition ranking).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct RankMatrix {
    n: usize,
    ranks: Vec<usize>,
    ties: bool,
}

impl RankMatrix {
    /// Builds a rank matrix whose rows are strict permutations with a unit
    /// diagonal.
    pub fn new(rows: Vec<Vec<usize>>) -> Result<Self> {
        let m = Self::with_ties(rows)?;
        if m.ties {
            let row = (0..m.n)
                .find(|&i| !is_permutation(m.row(i)))
                .unwrap_or_default();
            return Err(Error::InvalidRankMatrix(format!(
                "row {row} is not a permutation of 1..={}",
                m.n
            )));
        }
        Ok(m)
    }

    /// Accepts rows with repeated ranks. The diagonal must still be 1 and
    /// every off-diagonal rank must lie in `2..=n`.
    pub fn with_ties(rows: Vec<Vec<usize>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidRankMatrix("empty matrix".into()));
        }
        let mut ranks = Vec::with_capacity(n * n);
        let mut ties = false;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidRankMatrix(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (t, &r) in row.iter().enumerate() {
                let ok = if t == i { r == 1 } else { (2..=n).contains(&r) };
                if !ok {
                    return Err(Error::InvalidRankMatrix(format!(
                        "entry ({i}, {t}) = {r} is out of range"
                    )));
                }
            }
            ties |= !is_permutation(row);
            ranks.extend_from_slice(row);
        }
        Ok(Self { n, ranks, ties })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_ties(&self) -> bool {
        self.ties
    }

    #[inline]
    pub fn rank(&self, i: usize, t: usize) -> usize {
        self.ranks[i * self.n + t]
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.ranks[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Points of the space ordered by increasing rank from `i`.
    pub fn order_from(&self, i: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.n).collect();
        idx.sort_by_key(|&t| (self.rank(i, t), t));
        idx
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|t| self.rank(i, t) == self.rank(t, i)))
    }

    /// Rank matrix induced on a subset of points (given in increasing order).
    pub fn restrict(&self, subset: &[usize]) -> Result<Self> {
        let rows = subset
            .iter()
            .map(|&i| {
                subset
                    .iter()
                    .map(|&t| {
                        let r = self.rank(i, t);
                        1 + subset.iter().filter(|&&u| self.rank(i, u) < r).count()
                    })
                    .collect()
            })
            .collect();
        Self::with_ties(rows)
    }

    /// Applies a relabelling: entry `(i, t)` of the result is `rank(p[i], p[t])`.
    pub fn permuted(&self, p: &[usize]) -> Result<Self> {
        Self::with_ties(
            (0..self.n)
                .map(|i| (0..self.n).map(|t| self.rank(p[i], p[t])).collect())
                .collect(),
        )
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let m = read_matrix_csv(path.as_ref())?;
        let rows = m
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|x| {
                        if x.fract() != 0.0 || x < 1.0 {
                            Err(Error::InvalidRankMatrix(format!("non-integer rank {x}")))
                        } else {
                            Ok(x as usize)
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::with_ties(rows)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let rows: Vec<Vec<String>> = (0..self.n)
            .map(|i| self.row(i).iter().map(|r| r.to_string()).collect())
            .collect();
        write_matrix_csv(path.as_ref(), &rows)
    }
}

fn is_permutation(row: &[usize]) -> bool {
    let mut seen = vec![false; row.len() + 1];
    row.iter()
        .all(|&r| r <= row.len() && !std::mem::replace(&mut seen[r], true))
}

impl TryFrom<Vec<Vec<usize>>> for RankMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<usize>>) -> Result<Self> {
        Self::with_ties(rows)
    }
}

impl From<RankMatrix> for Vec<Vec<usize>> {
    fn from(m: RankMatrix) -> Self {
        m.rows()
    }
}

/// Probability weights on `{0, .., n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution {
    weights: Vec<f64>,
}

const SUM_TOL: f64 = 1e-9;

impl Distribution {
    /// Validates non-negativity and unit mass (to 1e-9), then renormalizes
    /// so the stored weights sum to 1 at machine precision.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("no weights".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidDistribution(format!("bad weight {w}")));
        }
        let s: f64 = weights.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidDistribution(format!("weights sum to {s}")));
        }
        Ok(Self::renormalized(weights))
    }

    /// Scales non-negative weights to unit mass.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "negative or non-finite weight".into(),
            ));
        }
        let s: f64 = weights.iter().sum();
        if s <= 0.0 {
            return Err(Error::InvalidDistribution("zero total mass".into()));
        }
        Ok(Self::renormalized(weights))
    }

    pub(crate) fn renormalized(mut weights: Vec<f64>) -> Self {
        for w in weights.iter_mut() {
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let s = super::compensated_sum(weights.iter().copied());
        for w in weights.iter_mut() {
            *w /= s;
        }
        Self { weights }
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0 / n as f64; n],
        }
    }

    /// One-hot weights at `s`.
    pub fn point_mass(n: usize, s: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[s] = 1.0;
        Self { weights }
    }

    /// Half-half weights on two distinct points.
    pub fn two_point(n: usize, a: usize, b: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[a] = 0.5;
        weights[b] = 0.5;
        Self { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.weights[i] > 0.0).collect()
    }

    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    pub fn linf_distance(&self, other: &Self) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;
    fn try_from(w: Vec<f64>) -> Result<Self> {
        Self::new(w)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Self {
        d.weights
    }
}

impl std::ops::Index<usize> for Distribution {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.weights[i]
    }
}

/// Row-stochastic transition matrix, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelMatrix {
    n: usize,
    entries: Vec<f64>,
}

const ROW_TOL: f64 = 1e-12;

impl KernelMatrix {
    /// Checks non-negativity and unit row sums to 1e-12.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotStochastic(format!("row {i} has wrong length")));
            }
            entries.extend(row);
        }
        let k = Self { n, entries };
        k.validate()?;
        Ok(k)
    }

    pub(crate) fn from_entries(n: usize, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), n * n);
        Self { n, entries }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::NotStochastic("empty matrix".into()));
        }
        for i in 0..self.n {
            let row = self.row(i);
            if let Some(x) = row.iter().find(|x| !x.is_finite() || **x < 0.0) {
                return Err(Error::NotStochastic(format!("row {i} has entry {x}")));
            }
            let s = super::compensated_sum(row.iter().copied());
            if (s - 1.0).abs() > ROW_TOL {
                return Err(Error::NotStochastic(format!("row {i} sums to {s}")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, t: usize) -> f64 {
        self.entries[i * self.n + t]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Row vector times matrix.
    pub fn left_multiply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, &k) in out.iter_mut().zip(self.row(i)) {
                *o += vi * k;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let rows: Vec<Vec<String>> = (0..self.n)
            .map(|i| self.row(i).iter().map(|x| format!("{x:.17e}")).collect())
            .collect();
        write_matrix_csv(path.as_ref(), &rows)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::new(read_matrix_csv(path.as_ref())?)
    }
}

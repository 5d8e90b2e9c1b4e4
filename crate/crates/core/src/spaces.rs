//! Metric spaces, initial laws, and finite-space constructions.
//!
//! Points are passed as `&[f64]` slices of length [`Space::dim`]. Finite
//! spaces ([`Space::PointCloud`], [`Space::FiniteRank`]) encode a point as its
//! index, stored as a one-element slice.

use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution as _;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{Distribution, RankMatrix};
use crate::io::read_matrix_csv;
use crate::mc::ParticlePopulation;

/// How a point cloud measures distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloudMetric {
    Euclidean,
    /// Explicit symmetric table with zero diagonal.
    Table(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Vec<f64>>,
    pub metric: CloudMetric,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        match &self.metric {
            CloudMetric::Table(d) => d.len(),
            CloudMetric::Euclidean => self.points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    fn dist(&self, a: usize, b: usize) -> f64 {
        match &self.metric {
            CloudMetric::Table(d) => d[a][b],
            CloudMetric::Euclidean => self.points[a]
                .iter()
                .zip(&self.points[b])
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }

    pub fn distance_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n)
            .map(|a| (0..n).map(|b| self.dist(a, b)).collect())
            .collect()
    }
}

/// A compact metric space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "SpaceRepr")]
pub enum Space {
    /// `[0, 1]` with `|x - y|`.
    Interval,
    /// `[0, 1)` with the wrap-around metric.
    Circle,
    /// `[0, 1]^dimension` with `sum_i beta^i |x_i - y_i|`, `i = 1..=dimension`.
    HypercubeWeighted {
        dimension: usize,
        beta: f64,
    },
    PointCloud(PointCloud),
    /// A finite space known only through its rank matrix.
    FiniteRank {
        rank_matrix: RankMatrix,
    },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum SpaceRepr {
    Interval,
    Circle,
    HypercubeWeighted { dimension: usize, beta: f64 },
    PointCloud(PointCloud),
    FiniteRank { rank_matrix: RankMatrix },
}

impl TryFrom<SpaceRepr> for Space {
    type Error = Error;
    fn try_from(r: SpaceRepr) -> Result<Self> {
        match r {
            SpaceRepr::Interval => Ok(Space::Interval),
            SpaceRepr::Circle => Ok(Space::Circle),
            SpaceRepr::HypercubeWeighted { dimension, beta } => Space::hypercube(dimension, beta),
            SpaceRepr::PointCloud(PointCloud { points, metric }) => match metric {
                CloudMetric::Euclidean => Space::point_cloud(points),
                CloudMetric::Table(d) => {
                    validate_distances(&d)?;
                    Ok(Space::PointCloud(PointCloud {
                        points,
                        metric: CloudMetric::Table(d),
                    }))
                }
            },
            SpaceRepr::FiniteRank { rank_matrix } => Ok(Space::FiniteRank { rank_matrix }),
        }
    }
}

impl Space {
    pub fn hypercube(dimension: usize, beta: f64) -> Result<Self> {
        if dimension == 0 || !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "hypercube needs dimension >= 1 and 0 < beta < 1 (got {dimension}, {beta})"
            )));
        }
        Ok(Space::HypercubeWeighted { dimension, beta })
    }

    /// Euclidean point cloud; all points must share one dimension.
    pub fn point_cloud(points: Vec<Vec<f64>>) -> Result<Self> {
        let Some(d) = points.first().map(Vec::len) else {
            return Err(Error::InvalidArgument(
                "point cloud needs at least one point".into(),
            ));
        };
        if let Some(p) = points.iter().find(|p| p.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.len(),
            });
        }
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite coordinate".into()));
        }
        Ok(Space::PointCloud(PointCloud {
            points,
            metric: CloudMetric::Euclidean,
        }))
    }

    /// Finite space from an explicit distance table, validated eagerly.
    pub fn distance_table(d: Vec<Vec<f64>>) -> Result<Self> {
        validate_distances(&d)?;
        Ok(Space::PointCloud(PointCloud {
            points: Vec::new(),
            metric: CloudMetric::Table(d),
        }))
    }

    pub fn point_cloud_from_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::point_cloud(read_matrix_csv(path.as_ref())?)
    }

    pub fn distance_table_from_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::distance_table(read_matrix_csv(path.as_ref())?)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Space::Interval => "interval",
            Space::Circle => "circle",
            Space::HypercubeWeighted { .. } => "hypercube_weighted",
            Space::PointCloud(_) => "point_cloud",
            Space::FiniteRank { .. } => "finite_rank",
        }
    }

    /// Length of the coordinate slice representing one point.
    pub fn dim(&self) -> usize {
        match self {
            Space::HypercubeWeighted { dimension, .. } => *dimension,
            _ => 1,
        }
    }

    /// Number of points of a finite space.
    pub fn finite_size(&self) -> Option<usize> {
        match self {
            Space::PointCloud(c) => Some(c.len()),
            Space::FiniteRank { rank_matrix } => Some(rank_matrix.n()),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.finite_size().is_some()
    }

    /// Rank matrix of a finite space; ties are an error.
    pub fn rank_matrix(&self) -> Result<RankMatrix> {
        match self {
            Space::FiniteRank { rank_matrix } => Ok(rank_matrix.clone()),
            Space::PointCloud(c) => rank_matrix_from_distances(&c.distance_matrix()),
            _ => Err(Error::InvalidArgument(format!(
                "{} is not a finite space",
                self.name()
            ))),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Space::Interval => 1.0,
            Space::Circle => 0.5,
            Space::HypercubeWeighted { dimension, beta } => {
                (1..=*dimension).map(|i| beta.powi(i as i32)).sum()
            }
            Space::PointCloud(c) => c
                .distance_matrix()
                .into_iter()
                .flatten()
                .fold(0.0, f64::max),
            Space::FiniteRank { rank_matrix } => (rank_matrix.n() - 1) as f64,
        }
    }

    pub fn validate_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let ok = match self {
            Space::Interval => (0.0..=1.0).contains(&x[0]),
            Space::Circle => (0.0..1.0).contains(&x[0]),
            Space::HypercubeWeighted { .. } => x.iter().all(|v| (0.0..=1.0).contains(v)),
            Space::PointCloud(_) | Space::FiniteRank { .. } => {
                let n = self.finite_size().unwrap_or(0) as f64;
                x[0].fract() == 0.0 && x[0] >= 0.0 && x[0] < n
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                value: x.to_vec(),
                space: self.name(),
            })
        }
    }

    /// Metric distance between two valid points.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        self.validate_point(x)?;
        self.validate_point(y)?;
        if let Space::FiniteRank { .. } = self {
            return Err(Error::InvalidArgument(
                "a rank-only space carries no metric".into(),
            ));
        }
        Ok(self.order_key(x, y))
    }

    /// Distance for metric spaces; the rank of `y` seen from `x` for
    /// rank-only spaces. Only the ordering it induces matters to the chain.
    #[inline]
    pub fn order_key(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Space::Interval => (x[0] - y[0]).abs(),
            Space::Circle => circle_distance(x[0], y[0]),
            Space::HypercubeWeighted { beta, .. } => weighted_l1(*beta, x, y),
            Space::PointCloud(c) => c.dist(x[0] as usize, y[0] as usize),
            Space::FiniteRank { rank_matrix } => {
                rank_matrix.rank(x[0] as usize, y[0] as usize) as f64
            }
        }
    }

    /// The scalar summary used for monitoring and diagnostics: the point
    /// itself on the interval, the arc position on the circle, the distance
    /// to the origin in the hypercube, and the index on finite spaces.
    #[inline]
    pub fn project(&self, x: &[f64]) -> f64 {
        match self {
            Space::HypercubeWeighted { beta, .. } => {
                let mut w = 1.0;
                x.iter()
                    .map(|v| {
                        w *= beta;
                        w * v.abs()
                    })
                    .sum()
            }
            _ => x[0],
        }
    }
}

#[inline]
pub(crate) fn circle_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).abs();
    d.min(1.0 - d)
}

#[inline]
pub(crate) fn weighted_l1(beta: f64, x: &[f64], y: &[f64]) -> f64 {
    let mut w = 1.0;
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            w *= beta;
            w * (a - b).abs()
        })
        .sum()
}

fn validate_distances(d: &[Vec<f64>]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Err(Error::InvalidDistances("empty table".into()));
    }
    for (i, row) in d.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidDistances(format!(
                "row {i} has {} entries",
                row.len()
            )));
        }
        if row[i] != 0.0 {
            return Err(Error::InvalidDistances(format!(
                "diagonal entry {i} is {}",
                row[i]
            )));
        }
        for (t, &x) in row.iter().enumerate() {
            if t != i && !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidDistances(format!("entry ({i}, {t}) = {x}")));
            }
            let y = d[t][i];
            if (x - y).abs() > 1e-12 * x.abs().max(1.0) {
                return Err(Error::InvalidDistances(format!("asymmetric at ({i}, {t})")));
            }
        }
    }
    Ok(())
}

/// Rank matrix of a symmetric distance table. Any within-row tie among
/// off-diagonal entries is an error naming the row and the tied pair.
pub fn rank_matrix_from_distances(d: &[Vec<f64>]) -> Result<RankMatrix> {
    validate_distances(d)?;
    let n = d.len();
    let mut rows = Vec::with_capacity(n);
    for (i, row) in d.iter().enumerate() {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| row[a].total_cmp(&row[b]));
        for w in idx.windows(2) {
            if row[w[0]] == row[w[1]] {
                let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
                return Err(Error::Tie { row: i, a, b });
            }
        }
        let mut ranks = vec![0; n];
        for (pos, &t) in idx.iter().enumerate() {
            ranks[t] = pos + 1;
        }
        rows.push(ranks);
    }
    RankMatrix::new(rows)
}

/// Leaf-to-leaf path lengths of a random binary tree with `n_leaves` leaves.
///
/// The shape is grown by attaching each new leaf to a uniformly chosen edge,
/// which gives the uniform law on leaf-labelled unrooted binary trees. Edge
/// lengths are i.i.d. uniform on (0.5, 1.5); they are redrawn until all
/// pairwise leaf distances are distinct.
pub fn random_btl_space(n_leaves: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n_leaves < 3 {
        return Err(Error::InvalidArgument(
            "a BTL space needs at least 3 leaves".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // nodes 0..n_leaves are leaves; internal nodes follow
    let mut edges: Vec<(usize, usize)> = vec![(0, n_leaves), (1, n_leaves), (2, n_leaves)];
    let mut next_internal = n_leaves + 1;
    for leaf in 3..n_leaves {
        let e = rng.random_range(0..edges.len());
        let (a, b) = edges[e];
        let mid = next_internal;
        next_internal += 1;
        edges[e] = (a, mid);
        edges.push((mid, b));
        edges.push((leaf, mid));
    }
    let n_nodes = next_internal;
    loop {
        let lengths: Vec<f64> = edges.iter().map(|_| rng.random_range(0.5..1.5)).collect();
        let mut adj = vec![Vec::new(); n_nodes];
        for (&(a, b), &len) in edges.iter().zip(&lengths) {
            adj[a].push((b, len));
            adj[b].push((a, len));
        }
        let d: Vec<Vec<f64>> = (0..n_leaves)
            .map(|src| {
                let mut dist = vec![f64::NAN; n_nodes];
                dist[src] = 0.0;
                let mut stack = vec![src];
                while let Some(v) = stack.pop() {
                    for &(w, len) in &adj[v] {
                        if dist[w].is_nan() {
                            dist[w] = dist[v] + len;
                            stack.push(w);
                        }
                    }
                }
                dist.truncate(n_leaves);
                dist
            })
            .collect();
        let mut all: Vec<f64> = (0..n_leaves)
            .flat_map(|a| (a + 1..n_leaves).map(move |b| (a, b)))
            .map(|(a, b)| d[a][b])
            .collect();
        all.sort_by(f64::total_cmp);
        if all.windows(2).all(|w| w[0] != w[1]) {
            // symmetrize exactly; the two traversals can differ in the last ulp
            let mut sym = d;
            for a in 1..n_leaves {
                let (upper, lower) = sym.split_at_mut(a);
                for (b, row) in upper.iter().enumerate() {
                    lower[0][b] = row[a];
                }
            }
            return Ok(sym);
        }
    }
}

/// Law of the initial iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialDistributionSpec {
    /// U[0, 1].
    UniformInterval,
    /// Density `1/2 + u` on [0, 1].
    Tilted,
    /// Density `2u` on [0, 1].
    MoreTilted,
    UniformCircle,
    /// Density `t + 1/2` on the circle [0, 1).
    CircleDisc,
    /// Density proportional to `exp(-alpha |x|^2)` on the hypercube.
    GaussianCube {
        alpha: f64,
    },
    FiniteWeights {
        weights: Distribution,
    },
    PointMass {
        location: Vec<f64>,
    },
    TwoPointMass {
        loc1: Vec<f64>,
        loc2: Vec<f64>,
    },
    /// Dirichlet(1, .., 1) weights on a finite space, drawn from `seed`.
    DirichletRandom {
        seed: u64,
    },
}

impl InitialDistributionSpec {
    pub fn name(&self) -> &'static str {
        match self {
            Self::UniformInterval => "uniform_interval",
            Self::Tilted => "tilted",
            Self::MoreTilted => "more_tilted",
            Self::UniformCircle => "uniform_circle",
            Self::CircleDisc => "circle_disc",
            Self::GaussianCube { .. } => "gaussian_cube",
            Self::FiniteWeights { .. } => "finite_weights",
            Self::PointMass { .. } => "point_mass",
            Self::TwoPointMass { .. } => "two_point_mass",
            Self::DirichletRandom { .. } => "dirichlet_random",
        }
    }

    fn incompatible(&self, space: &Space) -> Error {
        Error::Incompatible {
            spec: self.name().into(),
            space: space.name().into(),
        }
    }

    pub fn check_compatible(&self, space: &Space) -> Result<()> {
        let ok = match self {
            Self::UniformInterval | Self::Tilted | Self::MoreTilted => *space == Space::Interval,
            Self::UniformCircle | Self::CircleDisc => *space == Space::Circle,
            Self::GaussianCube { alpha } => {
                if !(*alpha > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "alpha must be positive, got {alpha}"
                    )));
                }
                matches!(space, Space::HypercubeWeighted { .. })
            }
            Self::FiniteWeights { weights } => space.finite_size() == Some(weights.len()),
            Self::DirichletRandom { .. } => space.is_finite(),
            Self::PointMass { location } => {
                space.validate_point(location)?;
                true
            }
            Self::TwoPointMass { loc1, loc2 } => {
                space.validate_point(loc1)?;
                space.validate_point(loc2)?;
                true
            }
        };
        if ok {
            Ok(())
        } else {
            Err(self.incompatible(space))
        }
    }

    /// The exact initial weights on a finite space.
    pub fn finite_weights(&self, space: &Space) -> Result<Distribution> {
        self.check_compatible(space)?;
        let n = space
            .finite_size()
            .ok_or_else(|| self.incompatible(space))?;
        match self {
            Self::FiniteWeights { weights } => Ok(weights.clone()),
            Self::DirichletRandom { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok(Distribution::renormalized(
                    (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect(),
                ))
            }
            Self::PointMass { location } => Ok(Distribution::point_mass(n, location[0] as usize)),
            Self::TwoPointMass { loc1, loc2 } => {
                let (a, b) = (loc1[0] as usize, loc2[0] as usize);
                if a == b {
                    Ok(Distribution::point_mass(n, a))
                } else {
                    Ok(Distribution::two_point(n, a, b))
                }
            }
            _ => Err(self.incompatible(space)),
        }
    }
}

const SAMPLE_CHUNK: usize = 4096;

/// Draws `n` i.i.d. points from `spec` on `space`. The result depends only
/// on `(spec, space, n, seed)`: points are generated in fixed-size chunks,
/// each with its own stream.
pub fn sample_initial(
    spec: &InitialDistributionSpec,
    space: &Space,
    n: usize,
    seed: u64,
) -> Result<ParticlePopulation> {
    spec.check_compatible(space)?;
    if n == 0 {
        return Err(Error::InvalidArgument(
            "population size must be positive".into(),
        ));
    }
    let dim = space.dim();
    let finite = match space.finite_size() {
        Some(_) => match spec {
            Self_::PointMass { .. } | Self_::TwoPointMass { .. } => None,
            _ => Some(
                WeightedIndex::new(spec.finite_weights(space)?.weights())
                    .map_err(|e| Error::InvalidDistribution(e.to_string()))?,
            ),
        },
        None => None,
    };
    let n_chunks = n.div_ceil(SAMPLE_CHUNK);
    let chunks: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = SAMPLE_CHUNK.min(n - c * SAMPLE_CHUNK);
            let mut out = Vec::with_capacity(count * dim);
            for _ in 0..count {
                draw_point(spec, space, finite.as_ref(), &mut rng, &mut out);
            }
            out
        })
        .collect();
    let coords = chunks.concat();
    Ok(ParticlePopulation::new(space.clone(), coords, 0, seed))
}

use InitialDistributionSpec as Self_;

fn inverse_tilted(u: f64) -> f64 {
    // F(x) = (x + x^2) / 2
    ((-1.0 + (1.0 + 8.0 * u).sqrt()) / 2.0).clamp(0.0, 1.0)
}

fn draw_point(
    spec: &InitialDistributionSpec,
    space: &Space,
    finite: Option<&WeightedIndex<f64>>,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<f64>,
) {
    match spec {
        Self_::UniformInterval | Self_::UniformCircle => out.push(rng.random::<f64>()),
        Self_::Tilted => out.push(inverse_tilted(rng.random())),
        Self_::CircleDisc => {
            let x = inverse_tilted(rng.random());
            out.push(if x >= 1.0 { 0.0 } else { x });
        }
        Self_::MoreTilted => out.push(rng.random::<f64>().sqrt()),
        Self_::GaussianCube { alpha } => {
            let dim = space.dim();
            let start = out.len();
            loop {
                out.truncate(start);
                let mut sq = 0.0;
                for _ in 0..dim {
                    let x: f64 = rng.random();
                    sq += x * x;
                    out.push(x);
                }
                if rng.random::<f64>() < (-alpha * sq).exp() {
                    break;
                }
            }
        }
        Self_::PointMass { location } => out.extend_from_slice(location),
        Self_::TwoPointMass { loc1, loc2 } => {
            out.extend_from_slice(if rng.random::<bool>() { loc1 } else { loc2 })
        }
        Self_::FiniteWeights { .. } | Self_::DirichletRandom { .. } => {
            let idx = finite.expect("finite sampler").sample(rng);
            out.push(idx as f64);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let c = Space::Circle.distance(&[0.1], &[0.9]).unwrap();
        assert!((c - 0.2).abs() < 1e-12);
        let i = Space::Interval.distance(&[0.3], &[0.7]).unwrap();
        assert!((i - 0.4).abs() < 1e-12);
        let cube = Space::hypercube(10, 0.7).unwrap();
        let d = cube.distance(&[0.0; 10], &[1.0; 10]).unwrap();
        let expected = 0.7 * (1.0 - 0.7f64.powi(10)) / 0.3;
        assert!((d - expected).abs() < 1e-12);
        assert!((d - 2.2675).abs() < 1e-4);
    }

    #[test]
    fn distance_errors() {
        assert!(Space::Interval.distance(&[1.2], &[0.0]).is_err());
        assert!(Space::Circle.distance(&[1.0], &[0.0]).is_err());
        let cube = Space::hypercube(3, 0.5).unwrap();
        assert!(matches!(
            cube.distance(&[0.0; 2], &[0.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(Space::hypercube(0, 0.5).is_err());
        assert!(Space::hypercube(3, 1.0).is_err());
    }

    #[test]
    fn distance_table_validation() {
        assert!(Space::distance_table(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).is_ok());
        assert!(Space::distance_table(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(Space::distance_table(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).is_err());
        assert!(Space::distance_table(vec![vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn five_point_ranks_golden() {
        let d = vec![
            vec![0.0, 1.714, 1.341, 1.656, 1.74],
            vec![1.714, 0.0, 1.298, 1.794, 1.03],
            vec![1.341, 1.298, 0.0, 1.715, 1.844],
            vec![1.656, 1.794, 1.715, 0.0, 1.524],
            vec![1.74, 1.03, 1.844, 1.524, 0.0],
        ];
        let r = rank_matrix_from_distances(&d).unwrap();
        assert_eq!(
            r.rows(),
            vec![
                vec![1, 4, 2, 3, 5],
                vec![4, 1, 3, 5, 2],
                vec![3, 2, 1, 4, 5],
                vec![3, 5, 4, 1, 2],
                vec![4, 2, 5, 3, 1],
            ]
        );
    }

    #[test]
    fn interval_points_ranks() {
        let space = Space::point_cloud(vec![vec![0.0], vec![0.4], vec![0.6], vec![1.0]]).unwrap();
        let r = space.rank_matrix().unwrap();
        assert_eq!(r.row(1), &[3, 1, 2, 4]);
        let two = rank_matrix_from_distances(&[vec![0.0, 3.0], vec![3.0, 0.0]]).unwrap();
        assert_eq!(two.rows(), vec![vec![1, 2], vec![2, 1]]);
    }

    #[test]
    fn ties_are_reported() {
        let d = vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.5],
            vec![1.0, 1.5, 0.0],
        ];
        match rank_matrix_from_distances(&d) {
            Err(Error::Tie { row, a, b }) => assert_eq!((row, a, b), (0, 1, 2)),
            other => panic!("expected tie, got {other:?}"),
        }
    }

    #[test]
    fn btl_star_and_determinism() {
        let d = random_btl_space(3, 9).unwrap();
        // star tree: d01 + d02 - d12 = 2a > 0, and all three pair sums consistent
        let a = (d[0][1] + d[0][2] - d[1][2]) / 2.0;
        let b = (d[0][1] + d[1][2] - d[0][2]) / 2.0;
        let c = (d[0][2] + d[1][2] - d[0][1]) / 2.0;
        for e in [a, b, c] {
            assert!(e > 0.5 - 1e-12 && e < 1.5 + 1e-12);
        }
        assert_eq!(
            random_btl_space(7, 42).unwrap(),
            random_btl_space(7, 42).unwrap()
        );
        assert!(random_btl_space(2, 0).is_err());
    }

    #[test]
    fn tilted_inverse_cdf() {
        for u in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let x = inverse_tilted(u);
            assert!(((x + x * x) / 2.0 - u).abs() < 1e-12);
        }
    }

    #[test]
    fn incompatible_specs() {
        assert!(sample_initial(
            &InitialDistributionSpec::UniformCircle,
            &Space::Interval,
            10,
            0
        )
        .is_err());
        assert!(sample_initial(
            &InitialDistributionSpec::DirichletRandom { seed: 1 },
            &Space::Interval,
            10,
            0
        )
        .is_err());
        assert!(sample_initial(
            &InitialDistributionSpec::PointMass {
                location: vec![2.0]
            },
            &Space::Interval,
            10,
            0
        )
        .is_err());
    }

    #[test]
    fn point_mass_population() {
        let pop = sample_initial(
            &InitialDistributionSpec::PointMass {
                location: vec![0.3],
            },
            &Space::Interval,
            100,
            5,
        )
        .unwrap();
        assert_eq!(pop.len(), 100);
        assert!(pop.iter().all(|p| p[0] == 0.3));
    }
}

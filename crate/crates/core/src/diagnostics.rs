//! Summaries and limit diagnostics for particle populations.
//!
//! Everything here works on the canonical 1-D projection of a population:
//! the coordinate on the interval, the arc position on the circle, the
//! weighted distance to the origin on the hypercube and the point index on
//! finite spaces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::ParticlePopulation;
use crate::spaces::Space;

pub const QUANTILE_LEVELS: [f64; 7] = [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99];

/// Clusters are separated by gaps wider than this many pooled
/// within-cluster standard deviations.
pub const GAP_FACTOR: f64 = 20.0;
/// Smallest gap threshold, relative to the space diameter.
pub const GAP_FLOOR: f64 = 1e-4;
pub const ONE_POINT_MASS: f64 = 0.999;
pub const TWO_POINT_MASS: f64 = 0.45;
/// Largest spread, relative to the diameter, of a one-point cluster that is
/// not visibly contracting, and of a whole population read as one point.
pub const ONE_POINT_SPREAD: f64 = 0.01;
pub const MIN_R_SQUARED: f64 = 0.99;

const KDE_GRID: usize = 1024;
const PEAK_LEVEL: f64 = 1.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub count: usize,
    /// Cluster medians, by decreasing mass.
    pub centers: Vec<f64>,
    pub masses: Vec<f64>,
    /// Within-cluster standard deviations.
    pub spreads: Vec<f64>,
    pub gap_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateSummary {
    pub generation: usize,
    pub n: usize,
    /// Per-coordinate mean.
    pub mean: Vec<f64>,
    /// Standard deviation of the projection.
    pub sd: f64,
    /// Projection quantiles at [`QUANTILE_LEVELS`].
    pub quantiles: Vec<f64>,
    pub clusters: ClusterReport,
    /// Distance between the two heaviest cluster centers.
    pub inter_cluster_distance: Option<f64>,
    pub chain_steps: usize,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitKind {
    OnePoint { s: f64 },
    TwoPoint { s1: f64, s2: f64 },
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub limit: LimitKind,
    pub clusters: ClusterReport,
    /// For two-point limits: whether the mass imbalance has not grown since
    /// the first two-cluster iterate.
    pub drifting_to_half: Option<bool>,
    /// Inter-cluster distance per iterate, where two clusters were present.
    pub inter_cluster_distances: Vec<(usize, f64)>,
    pub note: Option<String>,
}

impl LimitKind {
    pub fn name(&self) -> &'static str {
        match self {
            LimitKind::OnePoint { .. } => "one_point",
            LimitKind::TwoPoint { .. } => "two_point",
            LimitKind::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c_fit: f64,
    pub r_squared: f64,
    pub burn_in: usize,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    // shifted by the first value so constant data give exactly zero
    let x0 = v[0];
    let shift = v.iter().map(|x| x - x0).sum::<f64>() / n;
    let var = v.iter().map(|x| (x - x0 - shift).powi(2)).sum::<f64>() / n;
    (x0 + shift, var.sqrt())
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sorted_projections(pop: &ParticlePopulation) -> Vec<f64> {
    let mut v = pop.projections();
    v.sort_unstable_by(f64::total_cmp);
    v
}

fn gap_floor(space: &Space) -> f64 {
    if space.is_finite() {
        // indices are integers: every distinct point is its own cluster
        0.5
    } else {
        GAP_FLOOR * space.diameter()
    }
}

struct Cluster {
    mass: f64,
    center: f64,
    sd: f64,
}

/// Fraction of the population a point needs within the gap threshold to
/// take part in linking.
pub const CORE_FRACTION: f64 = 1e-3;

/// Gap clustering of sorted 1-D data with an iterated threshold.
///
/// Only dense ("core") points, those with at least `min_pts` others within
/// the threshold, link clusters, so a thin trail of stragglers between two
/// tight groups does not chain them together. Stragglers are then assigned
/// to the nearest cluster. The threshold is iterated to
/// `max(floor, GAP_FACTOR * pooled core sd)`.
///
/// On the circle the data are first cut at the widest gap (including the
/// wrap-around one) so that no cluster straddles the cut.
fn cluster(sorted: &[f64], floor: f64, circular: bool, min_pts: usize) -> (Vec<Cluster>, f64) {
    let n = sorted.len();
    let data: Vec<f64> = if circular && n > 1 {
        let mut widest = (1.0 - sorted[n - 1] + sorted[0], 0);
        for i in 1..n {
            let gap = sorted[i] - sorted[i - 1];
            if gap > widest.0 {
                widest = (gap, i);
            }
        }
        let start = widest.1;
        (0..n)
            .map(|i| {
                let idx = (start + i) % n;
                if idx < start {
                    sorted[idx] + 1.0
                } else {
                    sorted[idx]
                }
            })
            .collect()
    } else {
        sorted.to_vec()
    };
    let min_pts = min_pts.min(n - 1);

    // cluster label per point, or None if no core point exists at `thr`
    let split = |thr: f64| -> Option<(Vec<usize>, usize)> {
        let mut core = vec![false; n];
        let (mut lo, mut hi) = (0, 0);
        for i in 0..n {
            while data[i] - data[lo] > thr {
                lo += 1;
            }
            while hi + 1 < n && data[hi + 1] - data[i] <= thr {
                hi += 1;
            }
            core[i] = hi - lo >= min_pts;
        }
        let cores: Vec<usize> = (0..n).filter(|&i| core[i]).collect();
        if cores.is_empty() {
            return None;
        }
        let mut label = vec![0usize; n];
        let mut count = 1;
        for w in cores.windows(2) {
            if data[w[1]] - data[w[0]] > thr {
                count += 1;
            }
            label[w[1]] = count - 1;
        }
        // stragglers join the nearest core point's cluster
        let mut next = 0;
        for i in 0..n {
            if core[i] {
                continue;
            }
            while next < cores.len() && cores[next] < i {
                next += 1;
            }
            let before = next.checked_sub(1).map(|c| cores[c]);
            let after = cores.get(next).copied();
            let nearest = match (before, after) {
                (Some(b), Some(a)) => {
                    if data[i] - data[b] <= data[a] - data[i] {
                        b
                    } else {
                        a
                    }
                }
                (Some(b), None) => b,
                (None, Some(a)) => a,
                (None, None) => unreachable!("cores is non-empty"),
            };
            label[i] = label[nearest];
        }
        Some((label, count))
    };
    let core_groups = |label: &[usize], count: usize, thr: f64| -> Vec<Vec<f64>> {
        let mut groups = vec![Vec::new(); count];
        let (mut lo, mut hi) = (0, 0);
        for i in 0..n {
            while data[i] - data[lo] > thr {
                lo += 1;
            }
            while hi + 1 < n && data[hi + 1] - data[i] <= thr {
                hi += 1;
            }
            if hi - lo >= min_pts {
                groups[label[i]].push(data[i]);
            }
        }
        groups
    };
    let pooled_sd = |groups: &[Vec<f64>]| -> f64 {
        let total: usize = groups.iter().map(Vec::len).sum();
        let ss: f64 = groups
            .iter()
            .map(|g| {
                let (m, _) = mean_sd(g);
                g.iter().map(|x| (x - m) * (x - m)).sum::<f64>()
            })
            .sum();
        (ss / total as f64).sqrt()
    };

    let mut thr = floor;
    let (mut label, mut count) = loop {
        if let Some(found) = split(thr) {
            break found;
        }
        thr *= 2.0;
    };
    for _ in 0..100 {
        let groups = core_groups(&label, count, thr);
        let next = floor.max(GAP_FACTOR * pooled_sd(&groups));
        if (next - thr).abs() <= 1e-12 * thr.max(1e-300) {
            break;
        }
        let Some((l, c)) = split(next) else {
            break;
        };
        thr = next;
        let same = c == count;
        (label, count) = (l, c);
        if same {
            break;
        }
    }

    let groups = core_groups(&label, count, thr);
    let mut members = vec![0usize; count];
    for &l in &label {
        members[l] += 1;
    }
    let mut clusters: Vec<Cluster> = groups
        .iter()
        .zip(&members)
        .map(|(g, &m)| {
            let mut center = quantile_sorted(g, 0.5);
            if circular {
                center = center.rem_euclid(1.0);
            }
            Cluster {
                mass: m as f64 / n as f64,
                center,
                sd: mean_sd(g).1,
            }
        })
        .collect();
    clusters.sort_by(|a, b| {
        b.mass
            .total_cmp(&a.mass)
            .then(a.center.total_cmp(&b.center))
    });
    (clusters, thr)
}

fn report(clusters: &[Cluster], thr: f64) -> ClusterReport {
    ClusterReport {
        count: clusters.len(),
        centers: clusters.iter().map(|c| c.center).collect(),
        masses: clusters.iter().map(|c| c.mass).collect(),
        spreads: clusters.iter().map(|c| c.sd).collect(),
        gap_threshold: thr,
    }
}

/// Distance between two cluster centers given as projections. Finite
/// spaces use the metric between the two points when one is defined.
fn projected_distance(space: &Space, a: f64, b: f64) -> Option<f64> {
    match space {
        Space::Circle => Some(crate::spaces::circle_distance(a, b)),
        s if s.is_finite() => s.distance(&[a], &[b]).ok(),
        _ => Some((a - b).abs()),
    }
}

fn cluster_population(pop: &ParticlePopulation) -> (ClusterReport, Option<f64>) {
    let sorted = sorted_projections(pop);
    let space = pop.space();
    let min_pts = if space.is_finite() {
        1
    } else {
        ((CORE_FRACTION * sorted.len() as f64) as usize).max(1)
    };
    let (clusters, thr) = cluster(
        &sorted,
        gap_floor(space),
        matches!(space, Space::Circle),
        min_pts,
    );
    let rep = report(&clusters, thr);
    let dist = (clusters.len() >= 2)
        .then(|| projected_distance(space, clusters[0].center, clusters[1].center))
        .flatten();
    (rep, dist)
}

pub fn summarize(pop: &ParticlePopulation) -> IterateSummary {
    let dim = pop.dim();
    let n = pop.len();
    let mut mean = vec![0.0; dim];
    for p in pop.iter() {
        for (m, x) in mean.iter_mut().zip(p) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let sorted = sorted_projections(pop);
    let (_, sd) = mean_sd(&sorted);
    let quantiles = QUANTILE_LEVELS
        .iter()
        .map(|&q| quantile_sorted(&sorted, q))
        .collect();
    let (clusters, inter_cluster_distance) = cluster_population(pop);

    let mut flags = Vec::new();
    if sd == 0.0 {
        flags.push("degenerate".to_string());
    }
    flags.extend(pop.lineage.warnings.iter().cloned());
    IterateSummary {
        generation: pop.generation,
        n,
        mean,
        sd,
        quantiles,
        clusters,
        inter_cluster_distance,
        chain_steps: pop.lineage.chain_steps,
        flags,
    }
}

/// Names the limit a trajectory is heading to, from its final population.
///
/// The heaviest cluster holding at least 99.9% of the mass gives a one-point
/// limit at its median, provided it is tight (spread within 1% of the
/// diameter) or the last three iterates have shrinking sd; a single broad,
/// non-contracting cluster is undecided. The two heaviest clusters each
/// holding at least 45% give a two-point limit. Anything else, or fewer than
/// three iterates, is undecided.
pub fn classify_limit(trajectory: &[IterateSummary], last: &ParticlePopulation) -> LimitReport {
    let (clusters, _) = cluster_population(last);
    classify_clusters(trajectory, clusters, last.space().diameter())
}

/// [`classify_limit`] using the clusters already recorded in the last
/// summary of the trajectory.
pub fn classify_summaries(trajectory: &[IterateSummary], diameter: f64) -> LimitReport {
    match trajectory.last() {
        Some(last) => classify_clusters(trajectory, last.clusters.clone(), diameter),
        None => LimitReport {
            limit: LimitKind::Undecided,
            clusters: report(&[], 0.0),
            drifting_to_half: None,
            inter_cluster_distances: Vec::new(),
            note: Some("empty trajectory".into()),
        },
    }
}

fn classify_clusters(
    trajectory: &[IterateSummary],
    clusters: ClusterReport,
    diameter: f64,
) -> LimitReport {
    let inter_cluster_distances: Vec<(usize, f64)> = trajectory
        .iter()
        .filter_map(|s| s.inter_cluster_distance.map(|d| (s.generation, d)))
        .collect();
    if trajectory.len() < 3 || clusters.count == 0 {
        return LimitReport {
            limit: LimitKind::Undecided,
            clusters,
            drifting_to_half: None,
            inter_cluster_distances,
            note: Some(format!("{} iterates; need at least 3", trajectory.len())),
        };
    }
    let m = &clusters.masses;
    let c = &clusters.centers;
    let tail = &trajectory[trajectory.len() - 3..];
    let contracting = tail.windows(2).all(|w| w[1].sd < w[0].sd);
    let tight = clusters.spreads[0] <= ONE_POINT_SPREAD * diameter;
    // a small population collapses onto a handful of atoms that the gap
    // rule keeps apart; a tight overall spread still means one point
    let last = &tail[2];
    let (limit, drifting_to_half) = if m[0] >= ONE_POINT_MASS && (tight || contracting) {
        (LimitKind::OnePoint { s: c[0] }, None)
    } else if last.sd <= ONE_POINT_SPREAD * diameter {
        (
            LimitKind::OnePoint {
                s: last.quantiles[3],
            },
            None,
        )
    } else if m.len() >= 2 && m[1] >= TWO_POINT_MASS {
        let imbalance = |s: &IterateSummary| (s.clusters.masses[0] - 0.5).abs();
        let drift = trajectory
            .iter()
            .find(|s| s.clusters.count >= 2 && s.clusters.masses[1] >= TWO_POINT_MASS)
            .map(|first| (m[0] - 0.5).abs() <= imbalance(first) + 1e-12);
        (
            LimitKind::TwoPoint {
                s1: c[0].min(c[1]),
                s2: c[0].max(c[1]),
            },
            drift,
        )
    } else {
        (LimitKind::Undecided, None)
    };
    LimitReport {
        limit,
        clusters,
        drifting_to_half,
        inter_cluster_distances,
        note: None,
    }
}

/// Weights below this count as absent when summarizing a finite law.
const FINITE_ATOM: f64 = 1e-12;

/// [`summarize`] for an exact law on a finite space: the projection is the
/// point index and every charged point is its own cluster.
pub fn summarize_finite(space: &Space, generation: usize, weights: &[f64]) -> IterateSummary {
    let idx = |i: usize| i as f64;
    let mean: f64 = weights.iter().enumerate().map(|(i, w)| w * idx(i)).sum();
    let var: f64 = weights
        .iter()
        .enumerate()
        .map(|(i, w)| w * (idx(i) - mean).powi(2))
        .sum();
    let quantiles = QUANTILE_LEVELS
        .iter()
        .map(|&q| {
            let mut acc = 0.0;
            let mut at = weights.len() - 1;
            for (i, w) in weights.iter().enumerate() {
                acc += w;
                if acc >= q - 1e-15 {
                    at = i;
                    break;
                }
            }
            idx(at)
        })
        .collect();
    let mut atoms: Vec<(usize, f64)> = weights
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, w)| w > FINITE_ATOM)
        .collect();
    atoms.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let clusters = ClusterReport {
        count: atoms.len(),
        centers: atoms.iter().map(|a| idx(a.0)).collect(),
        masses: atoms.iter().map(|a| a.1).collect(),
        spreads: vec![0.0; atoms.len()],
        gap_threshold: 0.5,
    };
    let inter_cluster_distance = (atoms.len() >= 2)
        .then(|| projected_distance(space, idx(atoms[0].0), idx(atoms[1].0)))
        .flatten();
    IterateSummary {
        generation,
        n: weights.len(),
        mean: vec![mean],
        sd: var.max(0.0).sqrt(),
        quantiles,
        clusters,
        inter_cluster_distance,
        chain_steps: 0,
        flags: Vec::new(),
    }
}

/// Least-squares fit of `log sd_n = a + n log c` over `n >= burn_in`.
pub fn fit_decay(sd: &[f64], burn_in: usize, force: bool) -> Result<DecayFit> {
    if sd.len() < burn_in + 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 values after burn-in {burn_in}, got {}",
            sd.len().saturating_sub(burn_in)
        )));
    }
    let window = &sd[burn_in..];
    if let Some(bad) = window.iter().find(|&&s| !(s > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "non-positive sd {bad} in fit window"
        )));
    }
    let xs: Vec<f64> = (burn_in..sd.len()).map(|i| i as f64).collect();
    let ys: Vec<f64> = window.iter().map(|s| s.ln()).collect();
    let (mx, _) = mean_sd(&xs);
    let (my, _) = mean_sd(&ys);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    if !force && r_squared < MIN_R_SQUARED {
        return Err(Error::PoorFit {
            r_squared,
            min: MIN_R_SQUARED,
        });
    }
    Ok(DecayFit {
        c_fit: slope.exp(),
        r_squared,
        burn_in,
    })
}

/// Projections shifted and scaled to mean 0 and standard deviation 1.
pub fn renormalize(pop: &ParticlePopulation) -> Result<Vec<f64>> {
    let proj = pop.projections();
    let (mean, sd) = mean_sd(&proj);
    if !(sd > 0.0) {
        return Err(Error::InvalidArgument(
            "population is degenerate (sd = 0)".into(),
        ));
    }
    Ok(proj.into_iter().map(|x| (x - mean) / sd).collect())
}

/// Silverman's rule of thumb.
fn silverman(sorted: &[f64]) -> f64 {
    let (_, sd) = mean_sd(sorted);
    let iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * (sorted.len() as f64).powf(-0.2)
}

/// Wrapped-Gaussian density estimate of a circle population on a regular
/// grid of [`KDE_GRID`] points. Samples are binned linearly onto the grid
/// and convolved with the wrapped kernel.
pub fn circle_kde(pop: &ParticlePopulation, bandwidth: Option<f64>) -> Result<Vec<f64>> {
    if !matches!(pop.space(), Space::Circle) {
        return Err(Error::InvalidArgument(format!(
            "peak counting needs a circle population, got {}",
            pop.space().name()
        )));
    }
    let sorted = sorted_projections(pop);
    let h = bandwidth
        .unwrap_or_else(|| silverman(&sorted))
        .max(1.0 / KDE_GRID as f64);
    let g = KDE_GRID;
    let mut bins = vec![0.0; g];
    for &x in &sorted {
        let pos = x.rem_euclid(1.0) * g as f64;
        let lo = pos.floor() as usize % g;
        let frac = pos - pos.floor();
        bins[lo] += 1.0 - frac;
        bins[(lo + 1) % g] += frac;
    }
    let n = sorted.len() as f64;
    // kernel weight for each grid offset, wrapped
    let norm = 1.0 / (h * (2.0 * std::f64::consts::PI).sqrt());
    let wraps = (6.0 * h).ceil() as i64 + 1;
    let kernel: Vec<f64> = (0..g)
        .map(|d| {
            let base = d as f64 / g as f64;
            (-wraps..=wraps)
                .map(|m| {
                    let z = (base + m as f64) / h;
                    norm * (-0.5 * z * z).exp()
                })
                .sum()
        })
        .collect();
    Ok((0..g)
        .map(|i| {
            (0..g)
                .filter(|&b| bins[b] != 0.0)
                .map(|b| bins[b] * kernel[(i + g - b) % g])
                .sum::<f64>()
                / n
        })
        .collect())
}

/// Strict local maxima of the circle density estimate that exceed 1.1 times
/// the uniform density.
pub fn count_peaks(pop: &ParticlePopulation, bandwidth: Option<f64>) -> Result<usize> {
    let f = circle_kde(pop, bandwidth)?;
    let g = f.len();
    Ok((0..g)
        .filter(|&i| {
            let v = f[i];
            v > PEAK_LEVEL && v > f[(i + g - 1) % g] && v > f[(i + 1) % g]
        })
        .count())
}

/// Mean absolute difference of equal-length sorted samples.
pub(crate) fn wasserstein_sorted(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// 1-D Wasserstein distance between projected populations. The larger one
/// is thinned to evenly spaced order statistics to match sizes.
pub fn wasserstein_1d(a: &ParticlePopulation, b: &ParticlePopulation) -> Result<f64> {
    wasserstein_values(&a.projections(), &b.projections())
}

/// [`wasserstein_1d`] on raw samples.
pub fn wasserstein_values(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("empty sample".into()));
    }
    let sort = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_unstable_by(f64::total_cmp);
        v
    };
    let (mut a, mut b) = (sort(a), sort(b));
    let thin = |big: &[f64], m: usize| -> Vec<f64> {
        let r = big.len() as f64 / m as f64;
        (0..m)
            .map(|i| big[((i as f64 + 0.5) * r) as usize])
            .collect()
    };
    if a.len() > b.len() {
        a = thin(&a, b.len());
    } else if b.len() > a.len() {
        b = thin(&b, a.len());
    }
    Ok(wasserstein_sorted(&a, &b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval(coords: Vec<f64>) -> ParticlePopulation {
        ParticlePopulation::new(Space::Interval, coords, 0, 0)
    }

    fn circle(coords: Vec<f64>) -> ParticlePopulation {
        ParticlePopulation::new(Space::Circle, coords, 0, 0)
    }

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
    }

    #[test]
    fn summary_uniform() {
        let s = summarize(&interval(grid(100_000)));
        assert!((s.sd - 1.0 / 12f64.sqrt()).abs() < 1e-4);
        assert!((s.quantiles[3] - 0.5).abs() < 1e-4);
        assert_eq!(s.clusters.count, 1);
    }

    #[test]
    fn summary_point_and_pair() {
        let s = summarize(&interval(vec![0.3; 10]));
        assert_eq!(s.sd, 0.0);
        assert_eq!(s.clusters.count, 1);
        assert!(s.flags.contains(&"degenerate".to_string()));

        let coords = (0..1000).map(|i| (i % 2) as f64).collect();
        let s = summarize(&interval(coords));
        assert!((s.mean[0] - 0.5).abs() < 1e-12);
        assert_eq!(s.clusters.count, 2);
        assert_eq!(s.clusters.masses, vec![0.5, 0.5]);
        assert_eq!(s.inter_cluster_distance, Some(1.0));
        assert!((s.clusters.masses.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn limit_kinds() {
        let p = interval(vec![0.4; 100]);
        let traj = vec![summarize(&p); 3];
        assert_eq!(
            classify_limit(&traj, &p).limit,
            LimitKind::OnePoint { s: 0.4 }
        );
        assert_eq!(classify_limit(&traj[..2], &p).limit, LimitKind::Undecided);

        let coords: Vec<f64> = (0..1000)
            .map(|i| if i < 480 { 1e-6 * (i % 7) as f64 } else { 1.0 })
            .collect();
        let p = interval(coords);
        let traj = vec![summarize(&p); 3];
        let r = classify_limit(&traj, &p);
        match r.limit {
            LimitKind::TwoPoint { s1, s2 } => assert!(s1 < 1e-5 && s2 == 1.0),
            other => panic!("{other:?}"),
        }
        assert_eq!(r.drifting_to_half, Some(true));

        // broad and not shrinking: not a one-point limit yet
        let p = interval(grid(10_000));
        let traj = vec![summarize(&p); 3];
        assert_eq!(classify_limit(&traj, &p).limit, LimitKind::Undecided);

        let coords: Vec<f64> = (0..1000).map(|i| if i < 300 { 0.0 } else { 1.0 }).collect();
        let p = interval(coords);
        let traj = vec![summarize(&p); 3];
        assert_eq!(classify_limit(&traj, &p).limit, LimitKind::Undecided);
    }

    #[test]
    fn circle_cluster_wraps() {
        let coords: Vec<f64> = (0..200)
            .map(|i| (0.999 + 1e-5 * i as f64).rem_euclid(1.0))
            .collect();
        let p = circle(coords);
        let s = summarize(&p);
        assert_eq!(s.clusters.count, 1);
        let traj = vec![s; 3];
        match classify_limit(&traj, &p).limit {
            LimitKind::OnePoint { s } => assert!(crate::spaces::circle_distance(s, 0.0) < 0.002),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn geometric_fit() {
        let sd: Vec<f64> = (0..10).map(|n| 0.2 * 0.5f64.powi(n)).collect();
        let f = fit_decay(&sd, 0, false).unwrap();
        assert!((f.c_fit - 0.5).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(fit_decay(&sd[..4], 1, false).is_err());
        assert!(fit_decay(&[1.0, 0.5, 0.0, 0.1, 0.1], 0, false).is_err());
        let noisy = [1.0, 0.1, 1.0, 0.1, 1.0, 0.1];
        assert!(matches!(
            fit_decay(&noisy, 0, false),
            Err(Error::PoorFit { .. })
        ));
        assert!(fit_decay(&noisy, 0, true).is_ok());
    }

    #[test]
    fn renormalized_moments() {
        let p = interval(grid(1001).into_iter().map(|x| x * x).collect());
        let z = renormalize(&p).unwrap();
        let (m, s) = mean_sd(&z);
        assert!(m.abs() < 1e-9 && (s - 1.0).abs() < 1e-9);
        assert!(renormalize(&interval(vec![0.5; 4])).is_err());
    }

    #[test]
    fn peaks() {
        assert_eq!(count_peaks(&circle(grid(20_000)), None).unwrap(), 0);
        assert_eq!(count_peaks(&circle(vec![0.7; 100]), None).unwrap(), 1);
        assert!(count_peaks(&interval(vec![0.7; 100]), None).is_err());
    }

    #[test]
    fn wasserstein() {
        let a = interval(grid(1000));
        assert_eq!(wasserstein_1d(&a, &a).unwrap(), 0.0);
        let d = wasserstein_1d(&interval(vec![0.0; 5]), &interval(vec![1.0; 7])).unwrap();
        assert_eq!(d, 1.0);
        // U[0,1] against the tilted law with quantile (-1 + sqrt(1 + 8u)) / 2
        let tilted: Vec<f64> = grid(100_000)
            .into_iter()
            .map(|u| (-1.0 + (1.0 + 8.0 * u).sqrt()) / 2.0)
            .collect();
        let d = wasserstein_1d(&interval(grid(100_000)), &interval(tilted)).unwrap();
        assert!((d - 1.0 / 12.0).abs() < 0.003, "{d}");
    }
}

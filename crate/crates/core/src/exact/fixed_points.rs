use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_order, Error, Result};

use super::{brute_force_kernel, build_kernel, stationary, Distribution, RankMatrix};

/// `pi_{j,k}(theta)`: the stationary law of the kernel built from `theta`.
pub fn apply_pi(r: &RankMatrix, theta: &Distribution, j: usize, k: usize) -> Result<Distribution> {
    let kernel = if r.has_ties() {
        brute_force_kernel(r, theta, j, k)?
    } else {
        build_kernel(r, theta, j, k)?
    };
    let pi = stationary(&kernel)?;
    debug_assert!(
        sandwich_holds(theta, &pi, k, 1e-10),
        "sandwich bound violated: theta={:?} pi={:?}",
        theta.weights(),
        pi.weights()
    );
    Ok(pi)
}

/// `theta(i)^k <= pi(i) <= k theta(i)` for every point, up to `tol`.
pub fn sandwich_holds(theta: &Distribution, pi: &Distribution, k: usize, tol: f64) -> bool {
    theta
        .weights()
        .iter()
        .zip(pi.weights())
        .all(|(&t, &p)| t.powi(k as i32) - tol <= p && p <= k as f64 * t + tol)
}

/// Trajectory `[theta0, pi(theta0), pi^2(theta0), ...]` of length `n_steps + 1`.
pub fn iterate_exact(
    r: &RankMatrix,
    theta0: &Distribution,
    j: usize,
    k: usize,
    n_steps: usize,
) -> Result<Vec<Distribution>> {
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(theta0.clone());
    for _ in 0..n_steps {
        let next = apply_pi(r, out.last().expect("non-empty"), j, k)?;
        out.push(next);
    }
    Ok(out)
}

fn residual(r: &RankMatrix, theta: &Distribution, j: usize, k: usize) -> Result<f64> {
    Ok(apply_pi(r, theta, j, k)?.l1_distance(theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn from_radius(radius: f64) -> Self {
        if radius > 1.0 + 1e-6 {
            Stability::Unstable
        } else if radius < 1.0 - 1e-6 {
            Stability::Stable
        } else {
            Stability::Marginal
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub theta_star: Distribution,
    /// `||pi(theta*) - theta*||_1`
    pub residual: f64,
    pub support_size: usize,
    pub spectral_radius: f64,
    pub stability: Stability,
}

impl FixedPointReport {
    /// True for the one-point and half-half two-point laws.
    pub fn is_omnipresent(&self) -> bool {
        let w = self.theta_star.weights();
        match self.support_size {
            1 => true,
            2 => w
                .iter()
                .filter(|&&x| x > 0.0)
                .all(|&x| (x - 0.5).abs() < 1e-9),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    pub n_restarts: usize,
    pub tol: f64,
    pub seed: u64,
    /// Spaces up to this size have every support of 3 or more points
    /// searched; larger spaces only search full support.
    pub enumerate_supports_up_to: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n_restarts: 16,
            tol: 1e-10,
            seed: 0,
            enumerate_supports_up_to: 7,
        }
    }
}

const NEWTON_MAX_STEPS: usize = 100;
const NEWTON_H: f64 = 1e-7;
const PRE_DAMPED_STEPS: usize = 5;
const FALLBACK_DAMPED_STEPS: usize = 500;
/// Searched fixed points must give every point of their face at least this
/// weight. Near a two-point law the map is almost the identity on the
/// other coordinates, so Newton can stall there with tiny weights and a
/// residual below tolerance.
const INTERIOR_FLOOR: f64 = 1e-5;
/// Per-point residual allowed relative to the point's weight; rejects
/// near-boundary points whose absolute residual is small only because
/// their weights are.
const RELATIVE_RESIDUAL: f64 = 1e-6;

/// The map restricted to one face of the simplex, in tangent coordinates
/// (last coordinate dropped).
struct Face {
    r: RankMatrix,
    j: usize,
    k: usize,
}

impl Face {
    fn m(&self) -> usize {
        self.r.n()
    }

    fn lift(&self, x: &[f64]) -> Option<Distribution> {
        let last = 1.0 - x.iter().sum::<f64>();
        if last <= 0.0 || x.iter().any(|&v| v <= 0.0) {
            return None;
        }
        let mut w = x.to_vec();
        w.push(last);
        Some(Distribution::renormalized(w))
    }

    fn g(&self, x: &[f64]) -> Option<Vec<f64>> {
        let theta = self.lift(x)?;
        let pi = apply_pi(&self.r, &theta, self.j, self.k).ok()?;
        Some(
            pi.weights()
                .iter()
                .zip(theta.weights())
                .take(self.m() - 1)
                .map(|(p, t)| p - t)
                .collect(),
        )
    }

    fn jacobian(&self, x: &[f64], gx: &[f64]) -> Option<DMatrix<f64>> {
        let d = x.len();
        let mut jac = DMatrix::zeros(d, d);
        let last = 1.0 - x.iter().sum::<f64>();
        for c in 0..d {
            let central = x[c] > 2.0 * NEWTON_H && last > 2.0 * NEWTON_H;
            let mut xp = x.to_vec();
            xp[c] += NEWTON_H;
            let gp = self.g(&xp)?;
            let col: Vec<f64> = if central {
                let mut xm = x.to_vec();
                xm[c] -= NEWTON_H;
                let gm = self.g(&xm)?;
                gp.iter()
                    .zip(&gm)
                    .map(|(a, b)| (a - b) / (2.0 * NEWTON_H))
                    .collect()
            } else {
                gp.iter().zip(gx).map(|(a, b)| (a - b) / NEWTON_H).collect()
            };
            for (row, v) in col.into_iter().enumerate() {
                jac[(row, c)] = v;
            }
        }
        Some(jac)
    }

    fn damped(&self, theta: Distribution, steps: usize) -> Option<Distribution> {
        let mut theta = theta;
        for _ in 0..steps {
            let pi = apply_pi(&self.r, &theta, self.j, self.k).ok()?;
            let w = theta
                .weights()
                .iter()
                .zip(pi.weights())
                .map(|(a, b)| 0.5 * (a + b))
                .collect();
            theta = Distribution::renormalized(w);
        }
        Some(theta)
    }

    fn newton(&self, start: &Distribution, tol: f64) -> Option<Distribution> {
        let mut x: Vec<f64> = start.weights()[..self.m() - 1].to_vec();
        let mut gx = self.g(&x)?;
        let norm = |g: &[f64]| g.iter().map(|v| v * v).sum::<f64>().sqrt();
        for _ in 0..NEWTON_MAX_STEPS {
            if norm(&gx) <= 0.1 * tol {
                break;
            }
            let jac = self.jacobian(&x, &gx)?;
            let step = jac
                .lu()
                .solve(&DVector::from_iterator(gx.len(), gx.iter().map(|v| -v)))?;
            let mut alpha = 1.0;
            let current = norm(&gx);
            let mut accepted = false;
            while alpha > 1e-6 {
                let cand: Vec<f64> = x
                    .iter()
                    .zip(step.iter())
                    .map(|(a, s)| a + alpha * s)
                    .collect();
                if let Some(gc) = self.g(&cand) {
                    if norm(&gc) < current {
                        x = cand;
                        gx = gc;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        self.lift(&x)
    }
}

fn embed(n: usize, support: &[usize], local: &Distribution) -> Distribution {
    let mut w = vec![0.0; n];
    for (&s, &v) in support.iter().zip(local.weights()) {
        w[s] = v;
    }
    Distribution::renormalized(w)
}

fn dirichlet_start(m: usize, rng: &mut ChaCha8Rng) -> Distribution {
    let w: Vec<f64> = (0..m).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    Distribution::renormalized(w)
}

/// All one-point and half-half two-point laws on `n` points.
pub fn omnipresent(n: usize) -> Vec<Distribution> {
    let mut out: Vec<Distribution> = (0..n).map(|s| Distribution::point_mass(n, s)).collect();
    for a in 0..n {
        for b in a + 1..n {
            out.push(Distribution::two_point(n, a, b));
        }
    }
    out
}

fn search_support(
    r: &RankMatrix,
    support: &[usize],
    j: usize,
    k: usize,
    cfg: &SearchConfig,
    stream: u64,
) -> Vec<Distribution> {
    let Ok(sub) = r.restrict(support) else {
        return Vec::new();
    };
    let face = Face { r: sub, j, k };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let mut found = Vec::new();
    let accept = |t: &Distribution| {
        let Ok(pi) = apply_pi(&face.r, t, j, k) else {
            return false;
        };
        let w = t.weights();
        pi.l1_distance(t) <= cfg.tol
            && w.iter().all(|&v| v > INTERIOR_FLOOR)
            && w.iter()
                .zip(pi.weights())
                .all(|(&a, &b)| (a - b).abs() <= RELATIVE_RESIDUAL * a)
    };
    for _ in 0..cfg.n_restarts {
        let start = dirichlet_start(support.len(), &mut rng);
        let Some(pre) = face.damped(start.clone(), PRE_DAMPED_STEPS) else {
            continue;
        };
        // unstable points repel the damped iteration, so Newton also runs
        // from the raw start
        let refined = [&start, &pre]
            .into_iter()
            .filter_map(|s| face.newton(s, cfg.tol))
            .find(|t| accept(t))
            .or_else(|| {
                face.damped(pre.clone(), FALLBACK_DAMPED_STEPS)
                    .filter(|t| accept(t))
            });
        if let Some(t) = refined {
            found.push(embed(r.n(), support, &t));
        }
    }
    found
}

/// Searches for fixed points of `pi_{j,k}`.
///
/// The omnipresent laws are always verified and reported. Additional fixed
/// points are searched from Dirichlet(1, .., 1) starts on every face of the
/// simplex with at least three vertices (or only the full face for large
/// spaces), each start refined by a few damped iterations and then Newton's
/// method in tangent coordinates. Results are deduplicated at `10 * tol` in
/// l1 and sorted.
pub fn find_fixed_points(
    r: &RankMatrix,
    j: usize,
    k: usize,
    cfg: &SearchConfig,
) -> Result<Vec<FixedPointReport>> {
    check_order(j, k)?;
    if cfg.n_restarts == 0 {
        return Err(Error::InvalidArgument("n_restarts must be >= 1".into()));
    }
    let n = r.n();
    let mut candidates = Vec::new();
    for theta in omnipresent(n) {
        if residual(r, &theta, j, k)? <= cfg.tol {
            candidates.push(theta);
        }
    }
    let supports: Vec<Vec<usize>> = if n <= cfg.enumerate_supports_up_to && n < 64 {
        (1u64..(1 << n))
            .filter(|m| m.count_ones() >= 3)
            .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect())
            .collect()
    } else if n >= 3 {
        vec![(0..n).collect()]
    } else {
        Vec::new()
    };
    let extra: Vec<Vec<Distribution>> = supports
        .par_iter()
        .map(|s| {
            let mask = s.iter().fold(0u64, |m, &i| m | 1 << i);
            search_support(r, s, j, k, cfg, mask)
        })
        .collect();
    candidates.extend(extra.into_iter().flatten());

    candidates.sort_by(|a, b| {
        b.weights()
            .iter()
            .zip(a.weights())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut unique: Vec<Distribution> = Vec::new();
    for c in candidates {
        if unique.iter().all(|u| u.l1_distance(&c) > 10.0 * cfg.tol) {
            unique.push(c);
        }
    }
    unique
        .into_iter()
        .map(|theta| {
            let residual = residual(r, &theta, j, k)?;
            let spectral_radius = jacobian_radius(r, &theta, j, k)?;
            Ok(FixedPointReport {
                support_size: theta.support().len(),
                residual,
                spectral_radius,
                stability: Stability::from_radius(spectral_radius),
                theta_star: theta,
            })
        })
        .collect()
}

const SPECTRUM_H: f64 = 1e-6;
const SPECTRUM_TOL: f64 = 1e-8;

/// Spectral radius of the finite-difference Jacobian of `theta -> pi(theta)`
/// at a fixed point, on the tangent space of the simplex.
///
/// Coordinates are taken relative to the heaviest point. Directions that
/// would leave the simplex use a one-sided difference.
pub fn stability_spectrum(
    r: &RankMatrix,
    theta_star: &Distribution,
    j: usize,
    k: usize,
) -> Result<f64> {
    let res = residual(r, theta_star, j, k)?;
    if res > SPECTRUM_TOL {
        return Err(Error::NotFixedPoint {
            residual: res,
            tol: SPECTRUM_TOL,
        });
    }
    jacobian_radius(r, theta_star, j, k)
}

fn jacobian_radius(r: &RankMatrix, theta: &Distribution, j: usize, k: usize) -> Result<f64> {
    let n = r.n();
    if n < 2 {
        return Ok(0.0);
    }
    let w = theta.weights();
    let reference = (0..n)
        .max_by(|&a, &b| w[a].total_cmp(&w[b]).then(b.cmp(&a)))
        .expect("n >= 2");
    let coords: Vec<usize> = (0..n).filter(|&i| i != reference).collect();
    let shifted = |i: usize, h: f64| -> Result<Distribution> {
        let mut v = w.to_vec();
        v[i] += h;
        v[reference] -= h;
        Distribution::normalized(v)
    };
    let base = apply_pi(r, theta, j, k)?;
    let mut jac = DMatrix::<f64>::zeros(n - 1, n - 1);
    for (c, &i) in coords.iter().enumerate() {
        let plus = apply_pi(r, &shifted(i, SPECTRUM_H)?, j, k)?;
        let (minus, span) = if w[i] >= SPECTRUM_H {
            (
                apply_pi(r, &shifted(i, -SPECTRUM_H)?, j, k)?,
                2.0 * SPECTRUM_H,
            )
        } else {
            (base.clone(), SPECTRUM_H)
        };
        for (row, &t) in coords.iter().enumerate() {
            jac[(row, c)] = (plus[t] - minus[t]) / span;
        }
    }
    Ok(jac
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r2() -> RankMatrix {
        RankMatrix::new(vec![
            vec![1, 2, 4, 3],
            vec![2, 1, 3, 4],
            vec![4, 2, 1, 3],
            vec![2, 4, 3, 1],
        ])
        .unwrap()
    }

    fn r2_fixed() -> Distribution {
        Distribution::new(vec![1.0 / 6.0, 1.0 / 6.0, 2.0 / 6.0, 2.0 / 6.0]).unwrap()
    }

    #[test]
    fn omnipresent_points_are_fixed() {
        let r = r2();
        for k in 2..5 {
            for j in 1..=k {
                for theta in omnipresent(4) {
                    let pi = apply_pi(&r, &theta, j, k).unwrap();
                    assert!(
                        pi.l1_distance(&theta) < 1e-14,
                        "j={j} k={k} {:?}",
                        theta.weights()
                    );
                }
            }
        }
    }

    #[test]
    fn r2_fixed_point_for_both_k2_maps() {
        for j in 1..=2 {
            let pi = apply_pi(&r2(), &r2_fixed(), j, 2).unwrap();
            assert!(pi.l1_distance(&r2_fixed()) < 1e-14);
        }
    }

    #[test]
    fn r2_is_unstable_for_nearest() {
        let radius = stability_spectrum(&r2(), &r2_fixed(), 1, 2).unwrap();
        assert!(radius > 1.0, "radius {radius}");
    }

    #[test]
    fn point_mass_is_stable_for_nearest() {
        for s in 0..4 {
            let radius = stability_spectrum(&r2(), &Distribution::point_mass(4, s), 1, 2).unwrap();
            assert!(radius < 1.0, "radius {radius}");
        }
    }

    #[test]
    fn spectrum_rejects_non_fixed_points() {
        let theta = Distribution::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert!(matches!(
            stability_spectrum(&r2(), &theta, 1, 2),
            Err(Error::NotFixedPoint { .. })
        ));
    }

    #[test]
    fn constant_trajectory_from_point_mass() {
        let traj = iterate_exact(&r2(), &Distribution::point_mass(4, 1), 2, 3, 5).unwrap();
        assert_eq!(traj.len(), 6);
        for t in &traj {
            assert!(t.l1_distance(&traj[0]) < 1e-14);
        }
    }

    #[test]
    fn search_finds_r2_fixed_point() {
        let reports = find_fixed_points(&r2(), 1, 2, &SearchConfig::default()).unwrap();
        assert!(reports
            .iter()
            .any(|rep| rep.theta_star.l1_distance(&r2_fixed()) < 1e-8
                && rep.stability == Stability::Unstable));
        // every one-point and two-point law is listed
        assert!(reports.iter().filter(|r| r.is_omnipresent()).count() >= 4 + 6);
        for rep in &reports {
            assert!(rep.residual <= 1e-10);
        }
    }
}

use rand::Rng;
use rayon::prelude::*;

use crate::diagnostics::wasserstein_sorted;
use crate::error::{check_order, Result};
use crate::rng::{derive_seed, stream_rng};
use crate::spaces::{circle_distance, Space};

use super::{MixingMode, MixingPolicy, ParticlePopulation};

const PARTICLE_CHUNK: usize = 1024;

/// One transition of the chain driven by a frozen source population.
struct Stepper<'a, F> {
    coords: &'a [f64],
    dim: usize,
    n: usize,
    j: usize,
    k: usize,
    key: F,
}

impl<F: Fn(&[f64], &[f64]) -> f64 + Sync> Stepper<'_, F> {
    #[inline]
    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Index (into the source) of the landing point from `x`.
    #[inline]
    fn step<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R, buf: &mut Vec<(f64, usize)>) -> usize {
        buf.clear();
        for _ in 0..self.k {
            let idx = rng.random_range(0..self.n);
            let d = (self.key)(x, self.point(idx));
            // insertion keeps buf sorted by distance
            let pos = buf.partition_point(|e| e.0 <= d);
            buf.insert(pos, (d, idx));
        }
        let target = buf[self.j - 1].0;
        let lo = buf.partition_point(|e| e.0 < target);
        let hi = buf.partition_point(|e| e.0 <= target);
        if hi - lo == 1 {
            buf[lo].1
        } else {
            buf[rng.random_range(lo..hi)].1
        }
    }
}

/// One step from `x`: draw `k` source particles with replacement and return
/// the one at the `j`'th smallest distance. A block of equal distances
/// around position `j` is resolved by a uniform choice over the block.
pub fn chain_step<R: Rng + ?Sized>(
    source: &ParticlePopulation,
    x: &[f64],
    j: usize,
    k: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_order(j, k)?;
    source.space().validate_point(x)?;
    let space = source.space();
    let stepper = Stepper {
        coords: source.coords(),
        dim: source.dim(),
        n: source.len(),
        j,
        k,
        key: |a: &[f64], b: &[f64]| space.order_key(a, b),
    };
    let mut buf = Vec::with_capacity(k);
    let idx = stepper.step(x, rng, &mut buf);
    Ok(source.point(idx).to_vec())
}

/// Estimates `pi_{j,k}` of the source's empirical law.
///
/// Every particle starts at its own source position and runs the chain for
/// `T` steps against the frozen source; final positions form the returned
/// population. Particle `i` in round `r` draws from stream `i` of a seed
/// derived from `(seed, generation, r)`, so output is independent of thread
/// count.
///
/// In adaptive mode the run is cut into rounds of `check_stride` steps.
/// After each round the sorted projections are compared with the previous
/// round's; the run stops after two consecutive rounds whose 1-D Wasserstein
/// change is within `w1_tol * sd(source)` plus the sampling noise floor
/// (estimated from a split-half comparison of the current marginal).
pub fn estimate_pi(
    source: &ParticlePopulation,
    j: usize,
    k: usize,
    policy: &MixingPolicy,
    seed: u64,
) -> Result<ParticlePopulation> {
    check_order(j, k)?;
    policy.validate()?;
    let generation = source.generation + 1;
    let mut out_lineage = source.lineage.clone();
    out_lineage.warnings.clear();
    let first = source.point(0);
    if source.iter().all(|p| p == first) {
        let mut out = source.clone().with_generation(generation);
        out.lineage = out_lineage;
        out.lineage.chain_steps = 0;
        return Ok(out);
    }
    let space = source.shared_space();
    let (positions, steps, capped) = match &*space {
        Space::Interval => run_chain(source, j, k, policy, seed, |a: &[f64], b: &[f64]| {
            (a[0] - b[0]).abs()
        }),
        Space::Circle => run_chain(source, j, k, policy, seed, |a: &[f64], b: &[f64]| {
            circle_distance(a[0], b[0])
        }),
        other => run_chain(source, j, k, policy, seed, |a: &[f64], b: &[f64]| {
            other.order_key(a, b)
        }),
    };
    let dim = source.dim();
    let mut coords = Vec::with_capacity(positions.len() * dim);
    for &p in &positions {
        coords.extend_from_slice(source.point(p));
    }
    let mut out =
        ParticlePopulation::with_shared(space, coords, generation, source.lineage.master_seed);
    out_lineage.chain_steps = steps;
    if capped {
        out_lineage.warnings.push(format!(
            "adaptive mixing reached the step cap ({steps}) at generation {generation}"
        ));
    }
    out.lineage = out_lineage;
    Ok(out)
}

fn sorted_proj(proj: &[f64], positions: &[usize]) -> Vec<f64> {
    let mut v: Vec<f64> = positions.iter().map(|&p| proj[p]).collect();
    v.par_sort_unstable_by(f64::total_cmp);
    v
}

fn split_half_noise(proj: &[f64], positions: &[usize]) -> f64 {
    let half = positions.len() / 2;
    if half == 0 {
        return 0.0;
    }
    let mut a: Vec<f64> = positions
        .iter()
        .step_by(2)
        .take(half)
        .map(|&p| proj[p])
        .collect();
    let mut b: Vec<f64> = positions
        .iter()
        .skip(1)
        .step_by(2)
        .take(half)
        .map(|&p| proj[p])
        .collect();
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    wasserstein_sorted(&a, &b) / std::f64::consts::SQRT_2
}

fn sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt()
}

fn run_chain<F>(
    source: &ParticlePopulation,
    j: usize,
    k: usize,
    policy: &MixingPolicy,
    seed: u64,
    key: F,
) -> (Vec<usize>, usize, bool)
where
    F: Fn(&[f64], &[f64]) -> f64 + Sync,
{
    let n = source.len();
    let stepper = Stepper {
        coords: source.coords(),
        dim: source.dim(),
        n,
        j,
        k,
        key,
    };
    let adaptive = policy.mode == MixingMode::Adaptive;
    let total = policy.planned_steps(k);
    let stride = policy.check_stride;
    let generation = source.generation as u64;

    let proj = if adaptive {
        source.projections()
    } else {
        Vec::new()
    };
    let scale = if adaptive {
        let s = sd(&proj);
        if s > 0.0 {
            s
        } else {
            source.space().diameter() * 1e-12
        }
    } else {
        0.0
    };
    let mut positions: Vec<usize> = (0..n).collect();
    let mut prev = if adaptive {
        sorted_proj(&proj, &positions)
    } else {
        Vec::new()
    };
    let mut quiet_checks = 0;
    let mut done = 0usize;
    let mut round = 0u64;
    while done < total {
        let steps = stride.min(total - done);
        let round_seed = derive_seed(seed, &[generation, round]);
        positions
            .par_chunks_mut(PARTICLE_CHUNK)
            .enumerate()
            .for_each(|(c, chunk)| {
                let mut buf = Vec::with_capacity(k);
                for (off, pos) in chunk.iter_mut().enumerate() {
                    let mut rng = stream_rng(round_seed, (c * PARTICLE_CHUNK + off) as u64);
                    let mut cur = *pos;
                    for _ in 0..steps {
                        cur = stepper.step(stepper.point(cur), &mut rng, &mut buf);
                    }
                    *pos = cur;
                }
            });
        done += steps;
        round += 1;
        if adaptive {
            let now = sorted_proj(&proj, &positions);
            let change = wasserstein_sorted(&now, &prev);
            let floor = policy.w1_tol * scale + split_half_noise(&proj, &positions);
            quiet_checks = if change <= floor { quiet_checks + 1 } else { 0 };
            prev = now;
            if quiet_checks >= 2 {
                return (positions, done, false);
            }
        }
    }
    (positions, done, adaptive)
}

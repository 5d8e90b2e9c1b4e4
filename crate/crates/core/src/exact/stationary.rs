use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

use super::{Distribution, KernelMatrix};

/// Above this size the stationary law is found by power iteration.
pub const DIRECT_SOLVE_MAX: usize = 512;

const POWER_CAP: usize = 1_000_000;
const POWER_TOL: f64 = 1e-14;

fn residual(k: &KernelMatrix, v: &[f64]) -> f64 {
    k.left_multiply(v)
        .iter()
        .zip(v)
        .map(|(a, b)| (a - b).abs())
        .sum()
}

/// Stationary law of a row-stochastic matrix with a unique invariant
/// distribution.
pub fn stationary(k: &KernelMatrix) -> Result<Distribution> {
    k.validate()?;
    if k.n() <= DIRECT_SOLVE_MAX {
        direct(k)
    } else {
        power(k)
    }
}

fn direct(k: &KernelMatrix) -> Result<Distribution> {
    let n = k.n();
    // (K^T - I) v = 0 with the last equation replaced by sum(v) = 1
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for t in 0..n {
            a[(t, i)] = k.get(i, t);
        }
        a[(i, i)] -= 1.0;
    }
    for t in 0..n {
        a[(n - 1, t)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let lu = a.clone().lu();
    let mut v = lu.solve(&b).ok_or(Error::NoConvergence {
        iterations: 0,
        residual: f64::INFINITY,
    })?;
    for _ in 0..2 {
        let r = &b - &a * &v;
        if let Some(dv) = lu.solve(&r) {
            v += dv;
        }
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual: f64::INFINITY,
        });
    }
    let dist = Distribution::renormalized(v.iter().map(|&x| x.max(0.0)).collect());
    let res = residual(k, dist.weights());
    // singular systems can slip through LU with garbage; catch them here
    if res > 1e-8 {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual: res,
        });
    }
    Ok(dist)
}

fn power(k: &KernelMatrix) -> Result<Distribution> {
    let n = k.n();
    let mut v = vec![1.0 / n as f64; n];
    let mut change = f64::INFINITY;
    for _ in 0..POWER_CAP {
        let next = k.left_multiply(&v);
        change = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
        v = next;
        if change < POWER_TOL {
            return Ok(Distribution::renormalized(v));
        }
    }
    Err(Error::NoConvergence {
        iterations: POWER_CAP,
        residual: change,
    })
}

//! The two-point space in closed form.
//!
//! On `{0, 1}` a law is a single number `p`, the mass at `0`, and
//! `pi_{j,k}` reduces to a scalar map. Iterates from `(0, 1/2)` either fall
//! to `0` (type I), rise to `1/2` (type II), or split around an interior
//! unstable fixed point `p_crit` (type III).

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_order, Error, Result};
use crate::exact::{binomial_tail_ge, binomial_tail_lt, MAX_K};

const GRID: usize = 10_000;
const ITERATIONS: usize = 1000;
const START: f64 = 0.25;
const LIMIT_TOL: f64 = 1e-9;

/// Largest `k_max` accepted by [`classification_table`].
pub const TABLE_K_MAX: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BehaviorType {
    /// Iterates from `(0, 1/2)` go to 0.
    I,
    /// Iterates from `(0, 1/2)` go to 1/2.
    II,
    /// An interior unstable fixed point splits the two behaviors.
    III,
}

impl fmt::Display for BehaviorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BehaviorType::I => "I",
            BehaviorType::II => "II",
            BehaviorType::III => "III",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinomialClassification {
    pub k: usize,
    pub j: usize,
    #[serde(rename = "type")]
    pub kind: BehaviorType,
    pub p_crit: Option<f64>,
}

/// Mass at the first point after one application of `pi_{j,k}` to `(p, 1-p)`.
///
/// From the first point the chain stays put unless at least `j` of the `k`
/// samples land on the second; the stationary mass is the ratio of the two
/// escape rates.
pub fn binomial_map(p: f64, j: usize, k: usize) -> Result<f64> {
    check_order(j, k)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} is not in [0, 1]")));
    }
    let into_first = binomial_tail_ge(k, p, k - j + 1)?;
    let out_of_first = binomial_tail_lt(k, p, j)?;
    Ok(into_first / (into_first + out_of_first))
}

fn g(p: f64, j: usize, k: usize) -> f64 {
    binomial_map(p, j, k).expect("validated order") - p
}

fn bisect(mut lo: f64, mut hi: f64, j: usize, k: usize) -> f64 {
    let mut g_lo = g(lo, j, k);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid, j, k);
        if g_mid == 0.0 {
            return mid;
        }
        if (g_mid > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    if g(lo, j, k).abs() <= g(hi, j, k).abs() {
        lo
    } else {
        hi
    }
}

/// Roots of `binomial_map(p) - p` strictly inside `(0, 1/2)`.
pub fn interior_fixed_points(j: usize, k: usize) -> Result<Vec<f64>> {
    check_order(j, k)?;
    let step = 0.5 / GRID as f64;
    let mut roots = Vec::new();
    let mut prev = (step, g(step, j, k));
    for i in 2..GRID {
        let p = i as f64 * step;
        let gp = g(p, j, k);
        if gp == 0.0 {
            roots.push(p);
        } else if prev.1 != 0.0 && (gp > 0.0) != (prev.1 > 0.0) {
            roots.push(bisect(prev.0, p, j, k));
        }
        prev = (p, gp);
    }
    Ok(roots)
}

/// Iterates the map `n` times from `p`; returns the whole trajectory.
pub fn iterate_map(p: f64, j: usize, k: usize, n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(p);
    let mut x = p;
    for _ in 0..n {
        x = binomial_map(x, j, k)?;
        out.push(x);
    }
    Ok(out)
}

pub fn classify(j: usize, k: usize) -> Result<BinomialClassification> {
    check_order(j, k)?;
    if k > MAX_K {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds {MAX_K}")));
    }
    let roots = interior_fixed_points(j, k)?;
    let kind = if !roots.is_empty() {
        BehaviorType::III
    } else {
        let end = *iterate_map(START, j, k, ITERATIONS)?.last().unwrap();
        if end <= LIMIT_TOL {
            BehaviorType::I
        } else if (end - 0.5).abs() <= LIMIT_TOL {
            BehaviorType::II
        } else {
            return Err(Error::NoConvergence {
                iterations: ITERATIONS,
                residual: end.min((end - 0.5).abs()),
            });
        }
    };
    Ok(BinomialClassification {
        k,
        j,
        kind,
        // with several roots the one closest to 1/2 is the repeller that
        // separates the basins seen from p = 1/2
        p_crit: roots.last().copied(),
    })
}

/// Every `(j, k)` with `2 <= k <= k_max`, ordered by `k` then `j`.
pub fn classification_table(k_max: usize) -> Result<Vec<BinomialClassification>> {
    if !(2..=TABLE_K_MAX).contains(&k_max) {
        return Err(Error::InvalidArgument(format!(
            "k_max must be in 2..={TABLE_K_MAX}, got {k_max}"
        )));
    }
    let cells: Vec<(usize, usize)> = (2..=k_max)
        .flat_map(|k| (1..=k).map(move |j| (j, k)))
        .collect();
    cells.into_par_iter().map(|(j, k)| classify(j, k)).collect()
}

/// CSV with columns `k,j,type,p_crit`; `p_crit` is empty unless type III.
pub fn write_table_csv(rows: &[BinomialClassification], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k", "j", "type", "p_crit"])?;
    for r in rows {
        let p = r.p_crit.map(|p| format!("{p:.12}")).unwrap_or_default();
        w.write_record([r.k.to_string(), r.j.to_string(), r.kind.to_string(), p])?;
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// Sufficient condition for `pi_{j,k}` to have no invariant density on
/// `[0, 1]`: `j = k`, or
/// `k!/((j-1)!(k-j)!) * (j-1)^(j-1) (k-j)^(k-j) / (k-1)^(k-1) <= 2`
/// with `0^0 = 1`.
pub fn density_nonexistence_check(j: usize, k: usize) -> Result<bool> {
    check_order(j, k)?;
    if j == k {
        return Ok(true);
    }
    if let Some(ans) = exact_density_check(j, k) {
        return Ok(ans);
    }
    let lnf = |n: usize| (1..=n).map(|i| (i as f64).ln()).sum::<f64>();
    let xlnx = |n: usize| {
        if n == 0 {
            0.0
        } else {
            n as f64 * (n as f64).ln()
        }
    };
    let lhs = lnf(k) - lnf(j - 1) - lnf(k - j) + xlnx(j - 1) + xlnx(k - j) - xlnx(k - 1);
    Ok(lhs <= 2f64.ln() + 1e-12)
}

fn exact_density_check(j: usize, k: usize) -> Option<bool> {
    let pow = |b: usize, e: usize| -> Option<u128> {
        (0..e).try_fold(1u128, |acc, _| acc.checked_mul(b as u128))
    };
    // k!/((j-1)!(k-j)!) = k * C(k-1, j-1)
    let mut c: u128 = 1;
    for i in 0..(j - 1) {
        c = c.checked_mul((k - 1 - i) as u128)? / (i as u128 + 1);
    }
    let lhs = (k as u128)
        .checked_mul(c)?
        .checked_mul(pow(j - 1, j - 1)?)?
        .checked_mul(pow(k - j, k - j)?)?;
    let rhs = pow(k - 1, k - 1)?.checked_mul(2)?;
    Some(lhs <= rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_examples() {
        assert!((binomial_map(0.3, 1, 2).unwrap() - 9.0 / 58.0).abs() < 1e-15);
        for k in 2..10 {
            for j in 1..=k {
                assert!((binomial_map(0.5, j, k).unwrap() - 0.5).abs() < 1e-15);
                assert_eq!(binomial_map(0.0, j, k).unwrap(), 0.0);
                assert_eq!(binomial_map(1.0, j, k).unwrap(), 1.0);
            }
        }
        assert!(binomial_map(1.5, 1, 2).is_err());
        assert!(binomial_map(0.5, 3, 2).is_err());
    }

    #[test]
    fn critical_point_k5() {
        let c = classify(4, 5).unwrap();
        assert_eq!(c.kind, BehaviorType::III);
        let p = c.p_crit.unwrap();
        assert!((p - 0.17267).abs() < 5e-6, "{p}");
        assert!(g(p, 4, 5).abs() < 1e-12);
        assert!((binomial_map(0.17267, 4, 5).unwrap() - 0.17267).abs() < 1e-4);
    }

    #[test]
    fn small_rows() {
        assert_eq!(classify(1, 2).unwrap().kind, BehaviorType::I);
        assert_eq!(classify(2, 2).unwrap().kind, BehaviorType::II);
        assert_eq!(classify(2, 2).unwrap().p_crit, None);
    }

    #[test]
    fn table_shape() {
        let t = classification_table(9).unwrap();
        assert_eq!(t.len(), 44);
        assert!(classification_table(13).is_err());
        assert!(classification_table(1).is_err());
    }

    #[test]
    fn table_csv() {
        let t = classification_table(3).unwrap();
        let mut buf = Vec::new();
        write_table_csv(&t, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("k,j,type,p_crit\n2,1,I,\n2,2,II,\n"));
    }

    #[test]
    fn nonexistence() {
        assert!(density_nonexistence_check(1, 2).unwrap());
        for k in 2..40 {
            assert!(density_nonexistence_check(k, k).unwrap());
        }
        // k=3, j=2: 3!/(1!1!) * 1 * 1 / 2^2 = 1.5
        assert!(density_nonexistence_check(2, 3).unwrap());
        // k=3, j=1: 3 * 1 * 2^2 / 2^2 = 3
        assert!(!density_nonexistence_check(1, 3).unwrap());
    }

    #[test]
    fn exact_and_log_paths_agree() {
        for k in 3..20 {
            for j in 1..k {
                let exact = exact_density_check(j, k).unwrap();
                let lnf = |n: usize| (1..=n).map(|i| (i as f64).ln()).sum::<f64>();
                let xlnx = |n: usize| {
                    if n == 0 {
                        0.0
                    } else {
                        n as f64 * (n as f64).ln()
                    }
                };
                let lhs =
                    lnf(k) - lnf(j - 1) - lnf(k - j) + xlnx(j - 1) + xlnx(k - j) - xlnx(k - 1);
                assert_eq!(exact, lhs <= 2f64.ln() + 1e-12, "j={j} k={k}");
            }
        }
    }
}

use crate::error::{check_order, Error, Result};

use super::tail::{OrderStatLaw, MAX_K};
use super::{Distribution, KernelMatrix, RankMatrix};

/// Largest number of sample tuples [`brute_force_kernel`] will enumerate.
pub const BRUTE_FORCE_BUDGET: u64 = 10_000_000;

fn check_inputs(r: &RankMatrix, theta: &Distribution, j: usize, k: usize) -> Result<()> {
    check_order(j, k)?;
    if k > MAX_K {
        return Err(Error::InvalidArgument(format!("k={k} exceeds {MAX_K}")));
    }
    if theta.len() != r.n() {
        return Err(Error::DimensionMismatch {
            expected: r.n(),
            got: theta.len(),
        });
    }
    Ok(())
}

/// Transition matrix of the chain that jumps from `i` to the `j`'th closest
/// of `k` i.i.d. draws from `theta`.
///
/// Entry `(i, t)` with `m = rank(i, t)` is the probability that the `j`'th
/// smallest sampled rank equals `m`, i.e. `B_j(F_i(m)) - B_j(F_i(m-1))` with
/// `F_i` the `theta`-mass of ranks `<= m` and `B_j(q) = P(Bin(k, q) >= j)`.
/// Samples can only tie by landing on the same point, so tie-breaking does
/// not affect the result. Rank matrices with within-row ties are rejected;
/// use [`brute_force_kernel`] for those.
pub fn build_kernel(
    r: &RankMatrix,
    theta: &Distribution,
    j: usize,
    k: usize,
) -> Result<KernelMatrix> {
    check_inputs(r, theta, j, k)?;
    if r.has_ties() {
        return Err(Error::InvalidRankMatrix(
            "rows contain tied ranks; the closed form needs strict orderings".into(),
        ));
    }
    let n = r.n();
    let w = theta.weights();
    let law = OrderStatLaw::new(j, k);
    let mut entries = vec![0.0; n * n];
    let mut above = vec![0.0; n + 1];
    for i in 0..n {
        let order = r.order_from(i);
        above[n] = 0.0;
        for m in (0..n).rev() {
            above[m] = above[m + 1] + w[order[m]];
        }
        let mut below = 0.0;
        for (m, &t) in order.iter().enumerate() {
            entries[i * n + t] = law.class_mass(below, w[t], above[m + 1]);
            below += w[t];
        }
    }
    Ok(KernelMatrix::from_entries(n, entries))
}

/// Oracle kernel by enumeration of all `n^k` ordered sample tuples.
///
/// For each tuple and each start point the samples are sorted by rank; when
/// the `j`'th position falls in a block of equal ranks the landing point is
/// chosen uniformly among the samples of that block. Works for rank matrices
/// with ties.
pub fn brute_force_kernel(
    r: &RankMatrix,
    theta: &Distribution,
    j: usize,
    k: usize,
) -> Result<KernelMatrix> {
    check_inputs(r, theta, j, k)?;
    let n = r.n();
    let tuples = (n as u64).checked_pow(k as u32).unwrap_or(u64::MAX);
    if tuples > BRUTE_FORCE_BUDGET {
        return Err(Error::BudgetExceeded {
            n,
            k,
            budget: BRUTE_FORCE_BUDGET,
        });
    }
    let w = theta.weights();
    let mut entries = vec![0.0; n * n];
    let mut tuple = vec![0usize; k];
    let mut sorted = vec![(0usize, 0usize); k];
    for _ in 0..tuples {
        let weight: f64 = tuple.iter().map(|&s| w[s]).product();
        if weight > 0.0 {
            for i in 0..n {
                for (slot, &s) in sorted.iter_mut().zip(&tuple) {
                    *slot = (r.rank(i, s), s);
                }
                sorted.sort_unstable_by_key(|p| p.0);
                let target = sorted[j - 1].0;
                let block: Vec<usize> = sorted
                    .iter()
                    .filter(|p| p.0 == target)
                    .map(|p| p.1)
                    .collect();
                let share = weight / block.len() as f64;
                for s in block {
                    entries[i * n + s] += share;
                }
            }
        }
        // odometer
        for slot in tuple.iter_mut() {
            *slot += 1;
            if *slot < n {
                break;
            }
            *slot = 0;
        }
    }
    Ok(KernelMatrix::from_entries(n, entries))
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

    #[test]
    fn r2_golden_matrix() {
        let theta = Distribution::new(vec![1.0 / 6.0, 1.0 / 6.0, 2.0 / 6.0, 2.0 / 6.0]).unwrap();
        let k = build_kernel(&r2(), &theta, 1, 2).unwrap();
        let expected = [
            [11.0 / 36.0, 1.0 / 4.0, 1.0 / 9.0, 1.0 / 3.0],
            [1.0 / 4.0, 11.0 / 36.0, 1.0 / 3.0, 1.0 / 9.0],
            [1.0 / 36.0, 7.0 / 36.0, 5.0 / 9.0, 2.0 / 9.0],
            [7.0 / 36.0, 1.0 / 36.0, 2.0 / 9.0, 5.0 / 9.0],
        ];
        for (i, row) in expected.iter().enumerate() {
            for (t, &e) in row.iter().enumerate() {
                assert!((k.get(i, t) - e).abs() < 1e-15, "({i},{t})");
            }
        }
        let oracle = brute_force_kernel(&r2(), &theta, 1, 2).unwrap();
        assert!(k.max_abs_diff(&oracle) < 1e-15);
    }

    #[test]
    fn one_hot_rows_stay_put() {
        let theta = Distribution::point_mass(4, 2);
        for k in 2..5 {
            for j in 1..=k {
                let kern = build_kernel(&r2(), &theta, j, k).unwrap();
                for i in 0..4 {
                    assert_eq!(kern.get(i, 2), 1.0);
                }
                let oracle = brute_force_kernel(&r2(), &theta, j, k).unwrap();
                assert_eq!(oracle.row(2), kern.row(2));
            }
        }
    }

    #[test]
    fn invalid_order_rejected() {
        let theta = Distribution::uniform(4);
        assert!(build_kernel(&r2(), &theta, 0, 2).is_err());
        assert!(build_kernel(&r2(), &theta, 3, 2).is_err());
        assert!(build_kernel(&r2(), &theta, 1, 1).is_err());
        assert!(build_kernel(&r2(), &Distribution::uniform(3), 1, 2).is_err());
    }

    #[test]
    fn ties_route_to_oracle() {
        // equidistant pair seen from point 0
        let r = RankMatrix::with_ties(vec![vec![1, 2, 2], vec![2, 1, 3], vec![2, 3, 1]]).unwrap();
        let theta = Distribution::uniform(3);
        assert!(build_kernel(&r, &theta, 1, 2).is_err());
        let k = brute_force_kernel(&r, &theta, 1, 2).unwrap();
        // from 0 the two other points are interchangeable
        assert!((k.get(0, 1) - k.get(0, 2)).abs() < 1e-15);
        assert!((k.get(0, 0) - 5.0 / 9.0).abs() < 1e-15);
        k.validate().unwrap();
    }

    #[test]
    fn budget_enforced() {
        let theta = Distribution::uniform(4);
        assert!(matches!(
            brute_force_kernel(&r2(), &theta, 1, 12),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}

//! Binomial tail probabilities and the order-statistic law they induce.

use crate::error::{Error, Result};

/// Largest sample count supported by the tail and kernel routines.
pub const MAX_K: usize = 64;

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in terms {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// `C(k, i)` as a float; exact for the k this crate uses.
pub(crate) fn choose(k: usize, i: usize) -> f64 {
    if i > k {
        return 0.0;
    }
    let i = i.min(k - i);
    let mut c = 1.0f64;
    for t in 0..i {
        c = c * (k - t) as f64 / (t + 1) as f64;
    }
    c.round()
}

fn pmf(k: usize, q: f64, i: usize) -> f64 {
    choose(k, i) * q.powi(i as i32) * (1.0 - q).powi((k - i) as i32)
}

fn check_q(q: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "probability {q} is outside [0, 1]"
        )));
    }
    Ok(())
}

/// `P(Bin(k, q) >= j)`, summed directly over the upper terms.
pub fn binomial_tail_ge(k: usize, q: f64, j: usize) -> Result<f64> {
    check_q(q)?;
    if k > MAX_K {
        return Err(Error::InvalidArgument(format!("k={k} exceeds {MAX_K}")));
    }
    if j == 0 {
        return Ok(1.0);
    }
    Ok(compensated_sum((j..=k).map(|i| pmf(k, q, i))).min(1.0))
}

/// `P(Bin(k, q) < j)`, summed directly over the lower terms.
pub fn binomial_tail_lt(k: usize, q: f64, j: usize) -> Result<f64> {
    check_q(q)?;
    if k > MAX_K {
        return Err(Error::InvalidArgument(format!("k={k} exceeds {MAX_K}")));
    }
    Ok(compensated_sum((0..j.min(k + 1)).map(|i| pmf(k, q, i))).min(1.0))
}

/// Law of the `j`'th smallest of `k` i.i.d. ranks, evaluated on one rank
/// class: mass `below` strictly closer, `at` on the class, `above` farther.
///
/// Equals `B_j(below + at) - B_j(below)` but is summed as a trinomial over
/// positive terms so small classes keep full relative precision.
pub(crate) struct OrderStatLaw {
    k: usize,
    j: usize,
    ln_fact: Vec<f64>,
}

impl OrderStatLaw {
    pub(crate) fn new(j: usize, k: usize) -> Self {
        Self {
            k,
            j,
            ln_fact: (0..=k).map(ln_factorial).collect(),
        }
    }

    pub(crate) fn class_mass(&self, below: f64, at: f64, above: f64) -> f64 {
        if at <= 0.0 {
            return 0.0;
        }
        let (k, j) = (self.k, self.j);
        let mut terms = Vec::with_capacity(k * j);
        for u in 0..j {
            for v in (j - u)..=(k - u) {
                let w = k - u - v;
                let coeff =
                    (self.ln_fact[k] - self.ln_fact[u] - self.ln_fact[v] - self.ln_fact[w]).exp();
                terms.push(coeff * below.powi(u as i32) * at.powi(v as i32) * above.powi(w as i32));
            }
        }
        compensated_sum(terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cases() {
        assert!((binomial_tail_ge(2, 0.3, 1).unwrap() - 0.51).abs() < 1e-15);
        for k in 2..10 {
            assert_eq!(binomial_tail_ge(k, 0.0, 1).unwrap(), 0.0);
            for j in 0..=k {
                assert!((binomial_tail_ge(k, 1.0, j).unwrap() - 1.0).abs() < 1e-15);
            }
        }
        // 5 * 0.2^4 * 0.8 + 0.2^5
        assert!((binomial_tail_ge(5, 0.2, 4).unwrap() - 0.00672).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_probability() {
        assert!(binomial_tail_ge(3, -0.1, 1).is_err());
        assert!(binomial_tail_ge(3, 1.5, 1).is_err());
    }

    #[test]
    fn tails_are_complementary() {
        for k in 2..=12 {
            for j in 1..=k {
                for q in [0.0, 0.01, 0.3, 0.5, 0.77, 1.0] {
                    let s = binomial_tail_ge(k, q, j).unwrap() + binomial_tail_lt(k, q, j).unwrap();
                    assert!((s - 1.0).abs() < 1e-14, "k={k} j={j} q={q}");
                }
            }
        }
    }

    #[test]
    fn class_mass_is_tail_difference() {
        for k in 2..=8 {
            for j in 1..=k {
                let law = OrderStatLaw::new(j, k);
                for (a, b) in [(0.0, 0.2), (0.1, 0.35), (0.6, 0.95), (0.3, 1.0)] {
                    let direct =
                        binomial_tail_ge(k, b, j).unwrap() - binomial_tail_ge(k, a, j).unwrap();
                    let m = law.class_mass(a, b - a, 1.0 - b);
                    assert!((direct - m).abs() < 1e-14, "k={k} j={j}");
                }
            }
        }
    }
}

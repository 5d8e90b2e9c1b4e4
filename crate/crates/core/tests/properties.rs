use nearmap::binomial::{binomial_map, interior_fixed_points};
use nearmap::diagnostics::{count_peaks, fit_decay, renormalize};
use nearmap::exact::{
    apply_pi, brute_force_kernel, build_kernel, sandwich_holds, Distribution, RankMatrix,
};
use nearmap::mc::{bound_steps, ParticlePopulation};
use nearmap::spaces::Space;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn weights(n: usize) -> impl Strategy<Value = Distribution> {
    prop::collection::vec(0.02f64..1.0, n).prop_map(|w| Distribution::normalized(w).unwrap())
}

/// A strict rank matrix: row `i` ranks `i` first, then the others in a
/// random order.
fn ranks(n: usize) -> impl Strategy<Value = RankMatrix> {
    let rows: Vec<_> = (0..n)
        .map(|i| Just((0..n).filter(|&t| t != i).collect::<Vec<_>>()).prop_shuffle())
        .collect();
    rows.prop_map(move |orders| {
        let mut m = vec![vec![0; n]; n];
        for (i, order) in orders.iter().enumerate() {
            m[i][i] = 1;
            for (pos, &t) in order.iter().enumerate() {
                m[i][t] = pos + 2;
            }
        }
        RankMatrix::new(m).unwrap()
    })
}

fn instance() -> impl Strategy<Value = (RankMatrix, Distribution, usize, usize)> {
    (2usize..=5, 2usize..=4).prop_flat_map(|(n, k)| (ranks(n), weights(n), 1..=k, Just(k)))
}

fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, dim)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_axioms(x in point(3), y in point(3), z in point(3), beta in 0.1f64..0.95) {
        let spaces = [
            (Space::Interval, 1),
            (Space::Circle, 1),
            (Space::hypercube(3, beta).unwrap(), 3),
        ];
        for (space, d) in spaces {
            let (x, y, z) = (&x[..d], &y[..d], &z[..d]);
            let dxy = space.distance(x, y).unwrap();
            prop_assert_eq!(space.distance(x, x).unwrap(), 0.0);
            prop_assert!(dxy >= 0.0 && dxy <= space.diameter() + 1e-12);
            prop_assert_eq!(dxy, space.distance(y, x).unwrap());
            prop_assert!(dxy <= space.distance(x, z).unwrap() + space.distance(z, y).unwrap() + 1e-12);
        }
    }

    #[test]
    fn closed_form_kernel_matches_enumeration((r, theta, j, k) in instance()) {
        let fast = build_kernel(&r, &theta, j, k).unwrap();
        let slow = brute_force_kernel(&r, &theta, j, k).unwrap();
        prop_assert!(fast.max_abs_diff(&slow) <= 1e-12);
        for i in 0..r.n() {
            let s: f64 = fast.row(i).iter().sum();
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn sandwich((r, theta, j, k) in instance()) {
        let pi = apply_pi(&r, &theta, j, k).unwrap();
        prop_assert!(sandwich_holds(&theta, &pi, k, 1e-12));
        prop_assert!((pi.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn relabelling_commutes_with_pi(
        (r, theta, j, k, p) in instance().prop_flat_map(|(r, t, j, k)| {
            let n = r.n();
            (Just(r), Just(t), Just(j), Just(k), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
        })
    ) {
        let rp = r.permuted(&p).unwrap();
        let tp = Distribution::new(p.iter().map(|&i| theta.weights()[i]).collect()).unwrap();
        let pi = apply_pi(&r, &theta, j, k).unwrap();
        let pip = apply_pi(&rp, &tp, j, k).unwrap();
        for (a, &i) in p.iter().enumerate() {
            prop_assert!((pip.weights()[a] - pi.weights()[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn two_point_map_is_antisymmetric(p in 0.0f64..=1.0, k in 2usize..=12, jr in 0.0f64..1.0) {
        let j = 1 + (jr * k as f64) as usize;
        let f = binomial_map(p, j, k).unwrap();
        let g = binomial_map(1.0 - p, j, k).unwrap();
        prop_assert!((f + g - 1.0).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn two_point_map_is_the_exact_engine_on_two_points(p in 0.01f64..0.99, k in 2usize..=8, jr in 0.0f64..1.0) {
        let j = 1 + (jr * k as f64) as usize;
        let r = RankMatrix::new(vec![vec![1, 2], vec![2, 1]]).unwrap();
        let theta = Distribution::new(vec![p, 1.0 - p]).unwrap();
        let pi = apply_pi(&r, &theta, j, k).unwrap();
        prop_assert!((pi.weights()[0] - binomial_map(p, j, k).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn decay_fit_recovers_a_geometric_ratio(a in 0.01f64..10.0, c in 0.05f64..0.99, len in 6usize..30, burn in 0usize..3) {
        let sd: Vec<f64> = (0..len).map(|n| a * c.powi(n as i32)).collect();
        let fit = fit_decay(&sd, burn, false).unwrap();
        prop_assert!((fit.c_fit - c).abs() <= 1e-12);
        prop_assert!(fit.r_squared > 1.0 - 1e-9);
    }

    #[test]
    fn renormalize_is_affine_invariant(seed in any::<u64>(), shift in 0.0f64..0.4, scale in 0.1f64..0.6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<f64> = (0..200).map(|_| rng.random::<f64>()).collect();
        let ys: Vec<Vec<f64>> = xs.iter().map(|x| vec![shift + scale * x]).collect();
        let xs: Vec<Vec<f64>> = xs.into_iter().map(|x| vec![x]).collect();
        let a = renormalize(&ParticlePopulation::from_points(Space::Interval, &xs).unwrap()).unwrap();
        let b = renormalize(&ParticlePopulation::from_points(Space::Interval, &ys).unwrap()).unwrap();
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).abs() <= 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn peak_count_is_rotation_invariant(m in 1usize..=4, shift in 0.0f64..1.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng, s: f64| -> Vec<Vec<f64>> {
            let mut inner = ChaCha8Rng::seed_from_u64(rng.random());
            (0..4000)
                .map(|i| {
                    let centre = (i % m) as f64 / m as f64;
                    // Irwin-Hall approximation of a normal with sd 0.015
                    let z: f64 = (0..12).map(|_| inner.random::<f64>()).sum::<f64>() - 6.0;
                    vec![(centre + 0.015 * z + s).rem_euclid(1.0)]
                })
                .collect()
        };
        let base = draw(&mut rng, 0.0);
        let moved = draw(&mut rng, shift);
        let a = count_peaks(&ParticlePopulation::from_points(Space::Circle, &base).unwrap(), None).unwrap();
        let b = count_peaks(&ParticlePopulation::from_points(Space::Circle, &moved).unwrap(), None).unwrap();
        prop_assert_eq!(a, m);
        prop_assert_eq!(b, m);
    }
}

#[test]
fn bound_steps_for_two_samples() {
    for eps in [1e-1, 1e-3, 1e-6] {
        let half = ((1.0f64 / eps).ln() / 2f64.ln()).ceil() as usize;
        assert_eq!(bound_steps(2, eps), 2 * half);
    }
}

#[test]
fn seven_of_eight_has_an_attracting_zero() {
    let roots = interior_fixed_points(7, 8).unwrap();
    assert_eq!(roots.len(), 1);
    assert!((roots[0] - 0.044760399).abs() < 1e-8);
    for p in [1e-3, 1e-2, 0.04] {
        assert!(binomial_map(p, 7, 8).unwrap() < p);
    }
    assert!(binomial_map(0.05, 7, 8).unwrap() > 0.05);
}

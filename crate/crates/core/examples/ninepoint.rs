//! Nine points in the plane from a random Dirichlet start: the exact
//! iterates for every j with k = 10 and where the mass ends up.
//!
//! cargo run --release --example ninepoint [seed]

use nearmap::exact::{iterate_exact, Distribution};
use nearmap::scenario::nine_points;
use nearmap::spaces::{InitialDistributionSpec, Space};

fn main() -> nearmap::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(1, |s| s.parse().expect("integer seed"));
    let space = Space::point_cloud(nine_points())?;
    let r = space.rank_matrix()?;
    let theta0: Distribution =
        InitialDistributionSpec::DirichletRandom { seed }.finite_weights(&space)?;
    println!(
        "start {:?}",
        theta0
            .weights()
            .iter()
            .map(|w| format!("{w:.3}"))
            .collect::<Vec<_>>()
    );
    for j in 1..=10 {
        let traj = iterate_exact(&r, &theta0, j, 10, 400)?;
        let last = traj.last().expect("non-empty");
        let support: Vec<String> = last
            .support()
            .into_iter()
            .filter(|&i| last.weights()[i] > 1e-6)
            .map(|i| format!("{i}:{:.3}", last.weights()[i]))
            .collect();
        println!("j={j:2}: {}", support.join(" "));
    }
    Ok(())
}

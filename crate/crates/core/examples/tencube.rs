//! The weighted ten-dimensional cube with a Gaussian start; iterates are
//! summarized through the projection onto the heaviest coordinate.
//!
//! cargo run --release --example tencube [alpha] [beta]

use nearmap::run::simulate_with;
use nearmap::scenario::ScenarioConfig;
use nearmap::spaces::{InitialDistributionSpec, Space};

fn main() -> nearmap::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<f64>().expect("numeric argument"));
    let alpha = args.next().unwrap_or(1.0);
    let beta = args.next().unwrap_or(0.9);
    for j in 1..=2 {
        let mut cfg = ScenarioConfig::new(
            format!("tencube_j{j}"),
            Space::hypercube(10, beta)?,
            InitialDistributionSpec::GaussianCube { alpha },
            j,
            2,
            8,
        );
        cfg.n_particles = 10_000;
        println!("alpha={alpha} beta={beta} j={j}");
        let sim = simulate_with(&cfg, |s, _| {
            println!(
                "  gen {:2} sd {:.5} mean[0] {:.4} clusters {}",
                s.generation, s.sd, s.mean[0], s.clusters.count
            );
        })?;
        println!("  limit {:?}", sim.classification.limit);
    }
    Ok(())
}

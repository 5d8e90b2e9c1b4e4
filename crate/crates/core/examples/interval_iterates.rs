//! Particle iterates of the map on [0, 1] from the uniform law: standard
//! deviation per generation, cluster structure and the limit.
//!
//! cargo run --release --example interval_iterates [j] [k] [particles]

use nearmap::run::simulate_with;
use nearmap::scenario::ScenarioConfig;
use nearmap::spaces::{InitialDistributionSpec, Space};

fn main() -> nearmap::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<usize>().expect("integer argument"));
    let j = args.next().unwrap_or(1);
    let k = args.next().unwrap_or(2);
    let mut cfg = ScenarioConfig::new(
        "interval",
        Space::Interval,
        InitialDistributionSpec::UniformInterval,
        j,
        k,
        10,
    );
    cfg.n_particles = args.next().unwrap_or(50_000);

    println!("gen        sd  clusters  steps  centers");
    let sim = simulate_with(&cfg, |s, _| {
        let centers: Vec<String> = s
            .clusters
            .centers
            .iter()
            .map(|c| format!("{c:.3}"))
            .collect();
        println!(
            "{:3}  {:8.5}  {:8}  {:5}  {}",
            s.generation,
            s.sd,
            s.clusters.count,
            s.chain_steps,
            centers.join(" ")
        );
    })?;
    println!("limit: {:?}", sim.classification.limit);
    Ok(())
}

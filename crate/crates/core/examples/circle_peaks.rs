//! Iterates on the circle from the uniform and the tilted disc law; peak
//! counts of the density estimate per generation.
//!
//! cargo run --release --example circle_peaks

use nearmap::diagnostics::count_peaks;
use nearmap::run::{simulate_with, State};
use nearmap::scenario::bundled_scenario;

fn main() -> nearmap::Result<()> {
    for name in ["circle_uniform_k4", "circle_disc_k4"] {
        let mut cfg = bundled_scenario(name)?;
        cfg.n_particles = 20_000;
        cfg.n_iterations = 8;
        let mut peaks = Vec::new();
        let sim = simulate_with(&cfg, |_, state| {
            if let State::Particles(pop) = state {
                peaks.push(count_peaks(pop, None).unwrap_or(0));
            }
        })?;
        println!(
            "{name} (j={}, k={}): peaks per generation {peaks:?}",
            cfg.j, cfg.k
        );
        println!("  limit {:?}", sim.classification.limit);
    }
    Ok(())
}

//! Shape of the iterates for j = 1, k = 2 after removing location and
//! scale: the renormalized histograms settle while the spread shrinks.
//!
//! cargo run --release --example scaling_limit

use nearmap::diagnostics::{fit_decay, renormalize};
use nearmap::run::{simulate_with, State};
use nearmap::scenario::ScenarioConfig;
use nearmap::spaces::{InitialDistributionSpec, Space};

const EDGES: [f64; 9] = [-3.0, -2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5];

fn main() -> nearmap::Result<()> {
    let mut cfg = ScenarioConfig::new(
        "scaling",
        Space::Interval,
        InitialDistributionSpec::UniformInterval,
        1,
        2,
        8,
    );
    cfg.n_particles = 50_000;
    let mut sds = Vec::new();
    simulate_with(&cfg, |s, state| {
        sds.push(s.sd);
        let State::Particles(pop) = state else { return };
        let Ok(z) = renormalize(pop) else { return };
        let n = z.len() as f64;
        let hist: Vec<String> = EDGES
            .windows(2)
            .map(|w| {
                let c = z.iter().filter(|&&x| x >= w[0] && x < w[1]).count();
                format!("{:.3}", c as f64 / n)
            })
            .collect();
        println!("gen {:2} sd {:.5} | {}", s.generation, s.sd, hist.join(" "));
    })?;
    let fit = fit_decay(&sds, 2, true)?;
    println!(
        "sd ratio per generation: {:.4} (r^2 {:.4})",
        fit.c_fit, fit.r_squared
    );
    Ok(())
}

//! Particle Monte Carlo for continuous spaces.

mod engine;
mod policy;
mod population;

pub use engine::{chain_step, estimate_pi};
pub use policy::{bound_steps, MixingMode, MixingPolicy};
pub use population::{Lineage, ParticlePopulation};

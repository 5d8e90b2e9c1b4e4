//! Iterated "jump to the j'th closest of k samples" measures.
//!
//! Given a law `theta` on a metric space, the chain that samples `k` points
//! from `theta` and jumps to the `j`'th closest of them has a stationary law
//! `pi_{j,k}(theta)`. This crate computes that map exactly on finite spaces
//! ([`exact`]), in closed form on two points ([`binomial`]), by particle
//! Monte Carlo on continuous spaces ([`mc`]), and iterates it with seeded,
//! resumable runs ([`run`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binomial;
pub mod cli;
pub mod diagnostics;
mod error;
pub mod exact;
pub mod io;
pub mod mc;
pub mod rng;
pub mod run;
pub mod scenario;
pub mod spaces;

pub use error::{Error, Result};

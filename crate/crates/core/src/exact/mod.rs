//! Exact engine for finite spaces.
//!
//! A finite space enters only through its [`RankMatrix`]. From a rank matrix
//! and a weight vector `theta` the transition matrix of the "jump to the
//! j'th closest of k samples" chain is built in closed form, its stationary
//! law is solved for directly, and the resulting map `theta -> pi(theta)` is
//! iterated, searched for fixed points and linearized around them.

mod btl;
mod feasibility;
mod fixed_points;
mod kernel;
mod stationary;
mod tail;
mod types;

pub use btl::{btl_scan, BtlFinding, BtlScanReport};
pub use feasibility::{feasibility_search, DEFAULT_MARGIN};
pub use fixed_points::{
    apply_pi, find_fixed_points, iterate_exact, omnipresent, sandwich_holds, stability_spectrum,
    FixedPointReport, SearchConfig, Stability,
};
pub use kernel::{brute_force_kernel, build_kernel, BRUTE_FORCE_BUDGET};
pub use stationary::{stationary, DIRECT_SOLVE_MAX};
pub use tail::{binomial_tail_ge, binomial_tail_lt, MAX_K};
pub use types::{Distribution, KernelMatrix, RankMatrix};

pub(crate) use tail::compensated_sum;

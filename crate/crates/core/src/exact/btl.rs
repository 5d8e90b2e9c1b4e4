use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_order, Error, Result};
use crate::rng::derive_seed;
use crate::spaces::{random_btl_space, rank_matrix_from_distances};

use super::{find_fixed_points, Distribution, SearchConfig};

/// A fixed point with full support that is not uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtlFinding {
    pub trial: usize,
    pub distances: Vec<Vec<f64>>,
    pub theta: Distribution,
    pub spectral_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtlScanReport {
    pub leaves: usize,
    pub trials: usize,
    pub j: usize,
    pub k: usize,
    pub seed: u64,
    /// Fixed points found per trial, of any support.
    pub fixed_points_per_trial: Vec<usize>,
    pub findings: Vec<BtlFinding>,
}

/// Searches `trials` random BTL spaces for non-uniform fixed points of
/// `pi_{j,k}` with full support. Trial `t` uses the space and search seed
/// derived from `(seed, t)`.
pub fn btl_scan(
    leaves: usize,
    trials: usize,
    j: usize,
    k: usize,
    seed: u64,
) -> Result<BtlScanReport> {
    check_order(j, k)?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let per_trial: Vec<(usize, Vec<BtlFinding>)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let s = derive_seed(seed, &[trial as u64]);
            let d = random_btl_space(leaves, s)?;
            let r = rank_matrix_from_distances(&d)?;
            let cfg = SearchConfig {
                seed: s,
                ..SearchConfig::default()
            };
            let found = find_fixed_points(&r, j, k, &cfg)?;
            let odd = found
                .iter()
                .filter(|f| f.support_size == leaves && !f.is_omnipresent())
                .map(|f| BtlFinding {
                    trial,
                    distances: d.clone(),
                    theta: f.theta_star.clone(),
                    spectral_radius: f.spectral_radius,
                })
                .collect();
            Ok((found.len(), odd))
        })
        .collect::<Result<_>>()?;
    let (fixed_points_per_trial, findings): (Vec<usize>, Vec<Vec<BtlFinding>>) =
        per_trial.into_iter().unzip();
    Ok(BtlScanReport {
        leaves,
        trials,
        j,
        k,
        seed,
        fixed_points_per_trial,
        findings: findings.into_iter().flatten().collect(),
    })
}

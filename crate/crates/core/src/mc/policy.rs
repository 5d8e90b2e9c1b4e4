use serde::{Deserialize, Serialize};

/// How many chain steps each particle takes per outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingMode {
    /// The worst-case variation-distance bound, solved for `epsilon`.
    Bound,
    /// Stop once successive marginals stop moving.
    Adaptive,
    Fixed {
        steps: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingPolicy {
    pub mode: MixingMode,
    /// Target variation distance in bound mode.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Adaptive mode: relative 1-D Wasserstein tolerance between successive
    /// checks, in units of the source's projected standard deviation.
    #[serde(default = "default_w1_tol")]
    pub w1_tol: f64,
    #[serde(default = "default_stride")]
    pub check_stride: usize,
    /// Hard ceiling on steps; `None` means the bound-mode length at
    /// `epsilon = 1e-3`.
    #[serde(default)]
    pub t_cap: Option<usize>,
}

fn default_epsilon() -> f64 {
    1e-3
}

fn default_w1_tol() -> f64 {
    1e-4
}

fn default_stride() -> usize {
    8
}

impl Default for MixingPolicy {
    fn default() -> Self {
        Self::adaptive()
    }
}

/// `2 * ceil(ln(1/eps) / -ln(1 - 1/k^(k-1)))`, saturating.
pub fn bound_steps(k: usize, epsilon: f64) -> usize {
    let rate = -(-(k as f64).powi(k as i32 - 1).recip()).ln_1p();
    let half = ((1.0 / epsilon).ln() / rate).ceil();
    if half.is_finite() && half < (usize::MAX / 2) as f64 {
        2 * half as usize
    } else {
        usize::MAX
    }
}

impl MixingPolicy {
    pub fn adaptive() -> Self {
        Self {
            mode: MixingMode::Adaptive,
            epsilon: default_epsilon(),
            w1_tol: default_w1_tol(),
            check_stride: default_stride(),
            t_cap: None,
        }
    }

    pub fn bound(epsilon: f64) -> Self {
        Self {
            mode: MixingMode::Bound,
            epsilon,
            ..Self::adaptive()
        }
    }

    pub fn fixed(steps: usize) -> Self {
        Self {
            mode: MixingMode::Fixed { steps },
            ..Self::adaptive()
        }
    }

    pub fn cap(&self, k: usize) -> usize {
        self.t_cap.unwrap_or_else(|| bound_steps(k, 1e-3))
    }

    /// Planned number of steps, before any adaptive early stop.
    pub fn planned_steps(&self, k: usize) -> usize {
        match self.mode {
            MixingMode::Bound => bound_steps(k, self.epsilon).min(self.cap(k)),
            MixingMode::Adaptive => self.cap(k),
            MixingMode::Fixed { steps } => steps,
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let bad = |m: &str| Err(crate::Error::InvalidArgument(m.into()));
        if self.check_stride == 0 {
            return bad("check_stride must be positive");
        }
        if self.mode == MixingMode::Bound && !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon must lie in (0, 1)");
        }
        if self.mode == MixingMode::Adaptive && !(self.w1_tol >= 0.0) {
            return bad("w1_tol must be non-negative");
        }
        Ok(())
    }
}

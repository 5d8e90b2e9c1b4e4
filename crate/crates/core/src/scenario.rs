//! Run configurations and the bundled experiment catalogue.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{check_order, Error, Result};
use crate::exact::{Distribution, RankMatrix};
use crate::mc::MixingPolicy;
use crate::spaces::{InitialDistributionSpec, Space};

/// Environment variable naming the default root for run directories.
pub const RUNS_DIR_ENV: &str = "NEARMAP_RUNS_DIR";

/// JSON schema for [`ScenarioConfig`] files.
pub const SCENARIO_SCHEMA: &str = include_str!("../schema/scenario.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Closed-form kernel and stationary solve; finite spaces only.
    Exact,
    #[default]
    Mc,
}

fn default_particles() -> usize {
    200_000
}

fn default_sample_cap() -> usize {
    50_000
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub space: Space,
    pub initial: InitialDistributionSpec,
    pub j: usize,
    pub k: usize,
    #[serde(default)]
    pub engine: Engine,
    #[serde(default = "default_particles")]
    pub n_particles: usize,
    pub n_iterations: usize,
    #[serde(default)]
    pub policy: MixingPolicy,
    #[serde(default)]
    pub master_seed: u64,
    /// Run directory; defaults to `$NEARMAP_RUNS_DIR/<name>` or
    /// `runs/<name>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Rows of `samples.csv` per iterate; larger populations are thinned.
    #[serde(default = "default_sample_cap")]
    pub sample_cap: usize,
    #[serde(default = "default_true")]
    pub store_samples: bool,
    /// Write every particle instead of a thinned subset.
    #[serde(default)]
    pub store_full: bool,
}

impl ScenarioConfig {
    pub fn new(
        name: impl Into<String>,
        space: Space,
        initial: InitialDistributionSpec,
        j: usize,
        k: usize,
        n_iterations: usize,
    ) -> Self {
        Self {
            name: name.into(),
            space,
            initial,
            j,
            k,
            engine: Engine::Mc,
            n_particles: default_particles(),
            n_iterations,
            policy: MixingPolicy::default(),
            master_seed: 0,
            output_dir: None,
            sample_cap: default_sample_cap(),
            store_samples: true,
            store_full: false,
        }
    }

    pub fn exact(mut self) -> Self {
        self.engine = Engine::Exact;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidScenario(format!("{}: {m}", self.name)));
        check_order(self.j, self.k)?;
        if self.engine == Engine::Exact && !self.space.is_finite() {
            return bad(format!(
                "exact engine needs a finite space, got {}",
                self.space.name()
            ));
        }
        if self.engine == Engine::Mc && self.n_particles < 2 {
            return bad("n_particles must be at least 2".into());
        }
        if self.sample_cap == 0 {
            return bad("sample_cap must be positive".into());
        }
        self.initial.check_compatible(&self.space)?;
        self.policy.validate()
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Where this run writes when no directory is given explicitly.
    pub fn default_dir(&self) -> PathBuf {
        if let Some(d) = &self.output_dir {
            return d.clone();
        }
        let root =
            std::env::var_os(RUNS_DIR_ENV).map_or_else(|| PathBuf::from("runs"), PathBuf::from);
        root.join(&self.name)
    }
}

pub fn five_point_distances() -> Vec<Vec<f64>> {
    vec![
        vec![0.0, 1.714, 1.341, 1.656, 1.74],
        vec![1.714, 0.0, 1.298, 1.794, 1.03],
        vec![1.341, 1.298, 0.0, 1.715, 1.844],
        vec![1.656, 1.794, 1.715, 0.0, 1.524],
        vec![1.74, 1.03, 1.844, 1.524, 0.0],
    ]
}

/// Rank matrix of the four-point example whose `(1/6, 1/6, 2/6, 2/6)` law is
/// fixed by both `k = 2` maps.
pub fn r2_rank_matrix() -> RankMatrix {
    RankMatrix::new(vec![
        vec![1, 2, 4, 3],
        vec![2, 1, 3, 4],
        vec![4, 2, 1, 3],
        vec![2, 4, 3, 1],
    ])
    .expect("valid rank matrix")
}

/// The perturbed 3x3 grid in the plane.
pub fn nine_points() -> Vec<Vec<f64>> {
    vec![
        vec![1.3843, 1.2619],
        vec![1.108, 2.4567],
        vec![1.1358, 3.4418],
        vec![2.2758, 3.27],
        vec![3.022, 1.162],
        vec![3.3549, 2.477],
        vec![2.4671, 2.1929],
        vec![2.3478, 1.3067],
        vec![3.2165, 3.0299],
    ]
}

fn uniform_weights(n: usize) -> InitialDistributionSpec {
    InitialDistributionSpec::FiniteWeights {
        weights: Distribution::uniform(n),
    }
}

/// Every bundled scenario.
pub fn bundled_scenarios() -> Vec<ScenarioConfig> {
    use InitialDistributionSpec as Init;
    let mut out = Vec::new();

    let five = Space::distance_table(five_point_distances()).expect("valid table");
    out.push(ScenarioConfig::new("paper-5pt", five, uniform_weights(5), 1, 2, 50).exact());

    let r2 = Space::FiniteRank {
        rank_matrix: r2_rank_matrix(),
    };
    let r2_law = Init::FiniteWeights {
        weights: Distribution::new(vec![1.0 / 6.0, 1.0 / 6.0, 2.0 / 6.0, 2.0 / 6.0])
            .expect("sums to 1"),
    };
    out.push(ScenarioConfig::new("paper-R2", r2, r2_law, 1, 2, 20).exact());

    let line =
        Space::point_cloud(vec![vec![0.0], vec![0.4], vec![0.6], vec![1.0]]).expect("points");
    out.push(ScenarioConfig::new("paper-0.4-0.6", line, uniform_weights(4), 3, 4, 20).exact());

    let nine = Space::point_cloud(nine_points()).expect("points");
    out.push(
        ScenarioConfig::new(
            "ninepoint_k10",
            nine,
            Init::DirichletRandom { seed: 1 },
            7,
            10,
            400,
        )
        .exact(),
    );

    for k in 2..=6 {
        for j in 1..=k {
            out.push(ScenarioConfig::new(
                format!("interval_u_k{k}_j{j}"),
                Space::Interval,
                Init::UniformInterval,
                j,
                k,
                12,
            ));
        }
    }
    out.push(ScenarioConfig::new(
        "interval_tilted",
        Space::Interval,
        Init::Tilted,
        4,
        4,
        12,
    ));
    out.push(ScenarioConfig::new(
        "interval_more_tilted",
        Space::Interval,
        Init::MoreTilted,
        4,
        4,
        12,
    ));
    out.push(ScenarioConfig::new(
        "circle_uniform_k4",
        Space::Circle,
        Init::UniformCircle,
        1,
        4,
        20,
    ));
    out.push(ScenarioConfig::new(
        "circle_disc_k4",
        Space::Circle,
        Init::CircleDisc,
        3,
        4,
        20,
    ));

    for alpha in [0.1, 1.0] {
        for beta in [0.7, 0.9] {
            for j in 1..=2 {
                out.push(ScenarioConfig::new(
                    format!("tencube_a{alpha:.1}_b{beta:.1}_j{j}"),
                    Space::hypercube(10, beta).expect("valid beta"),
                    Init::GaussianCube { alpha },
                    j,
                    2,
                    12,
                ));
            }
        }
    }
    out
}

pub fn bundled_scenario(name: &str) -> Result<ScenarioConfig> {
    bundled_scenarios()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::InvalidScenario(format!("no bundled scenario named {name:?}")))
}

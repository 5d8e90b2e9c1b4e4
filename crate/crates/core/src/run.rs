//! Iterated runs: in memory or persisted to a resumable run directory.
//!
//! A run directory holds
//!
//! - `config.json`: the scenario, echoed verbatim;
//! - `iter_{n}/summary.json` and, unless disabled, `iter_{n}/samples.csv`;
//! - `summaries.csv`: one row per iterate;
//! - `state/`: a checkpoint of the latest iterate, used by [`resume`];
//! - `artifact.json`: the [`RunArtifact`], written when the run finishes;
//! - `run.lock` while a process owns the directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, DecayFit, IterateSummary, LimitReport};
use crate::error::{Error, Result};
use crate::exact::{apply_pi, Distribution, RankMatrix};
use crate::mc::{estimate_pi, Lineage, ParticlePopulation};
use crate::rng::{derive_seed, stream_rng};
use crate::scenario::{Engine, ScenarioConfig};
use crate::spaces::sample_initial;

const LOCK_FILE: &str = "run.lock";
const CONFIG_FILE: &str = "config.json";
const SUMMARIES_FILE: &str = "summaries.csv";
const ARTIFACT_FILE: &str = "artifact.json";
const STATE_DIR: &str = "state";
const CHECKPOINT_FILE: &str = "checkpoint.json";
const POPULATION_FILE: &str = "population.bin";

// seed paths under the master seed
const INITIAL_TAG: u64 = 0;
const STEP_TAG: u64 = 1;
const THIN_TAG: u64 = 2;

/// Iterates of the sd fit that are skipped as transient.
const DECAY_BURN_IN: usize = 2;

/// How the Monte Carlo engine approximates `pi` per iterate.
pub const MC_METHOD: &str = "frozen-source chain: every particle starts at its own source position and \
runs T steps of the j-of-k chain against the frozen source population; final positions form the next iterate";
pub const EXACT_METHOD: &str = "closed-form kernel and stationary solve on the finite space";

/// The current iterate of a run.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Particles(ParticlePopulation),
    Weights {
        theta: Distribution,
        generation: usize,
    },
}

impl State {
    pub fn generation(&self) -> usize {
        match self {
            State::Particles(p) => p.generation,
            State::Weights { generation, .. } => *generation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    /// Wall time of each step, from iterate 1 on.
    pub step_seconds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub config: ScenarioConfig,
    pub method: String,
    pub summaries: Vec<IterateSummary>,
    pub classification: LimitReport,
    /// Geometric fit of the sd sequence, when it is good enough.
    pub decay_fit: Option<DecayFit>,
    pub timing: Timing,
    pub warnings: Vec<String>,
}

/// Stepping machinery shared by in-memory and persisted runs.
struct Stepper<'a> {
    cfg: &'a ScenarioConfig,
    rank: Option<RankMatrix>,
}

impl<'a> Stepper<'a> {
    fn new(cfg: &'a ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let rank = match cfg.engine {
            Engine::Exact => Some(cfg.space.rank_matrix()?),
            Engine::Mc => None,
        };
        Ok(Self { cfg, rank })
    }

    fn initial(&self) -> Result<State> {
        let seed = derive_seed(self.cfg.master_seed, &[INITIAL_TAG]);
        match self.cfg.engine {
            Engine::Exact => Ok(State::Weights {
                theta: self.cfg.initial.finite_weights(&self.cfg.space)?,
                generation: 0,
            }),
            Engine::Mc => {
                let mut pop = sample_initial(
                    &self.cfg.initial,
                    &self.cfg.space,
                    self.cfg.n_particles,
                    seed,
                )?;
                pop.lineage.master_seed = self.cfg.master_seed;
                Ok(State::Particles(pop))
            }
        }
    }

    fn step(&self, state: &State) -> Result<State> {
        let (j, k) = (self.cfg.j, self.cfg.k);
        match state {
            State::Particles(pop) => {
                let seed = derive_seed(self.cfg.master_seed, &[STEP_TAG, pop.generation as u64]);
                Ok(State::Particles(estimate_pi(
                    pop,
                    j,
                    k,
                    &self.cfg.policy,
                    seed,
                )?))
            }
            State::Weights { theta, generation } => Ok(State::Weights {
                theta: apply_pi(
                    self.rank.as_ref().expect("exact engine has ranks"),
                    theta,
                    j,
                    k,
                )?,
                generation: generation + 1,
            }),
        }
    }

    fn summarize(&self, state: &State) -> IterateSummary {
        match state {
            State::Particles(pop) => diagnostics::summarize(pop),
            State::Weights { theta, generation } => {
                diagnostics::summarize_finite(&self.cfg.space, *generation, theta.weights())
            }
        }
    }

    fn classify(&self, summaries: &[IterateSummary]) -> LimitReport {
        let diameter = match self.cfg.engine {
            // projections are point indices
            Engine::Exact => self
                .cfg
                .space
                .finite_size()
                .map_or(1.0, |n| n.saturating_sub(1) as f64),
            Engine::Mc => self.cfg.space.diameter(),
        };
        diagnostics::classify_summaries(summaries, diameter)
    }
}

/// The result of an in-memory run.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub summaries: Vec<IterateSummary>,
    pub classification: LimitReport,
    pub last: State,
}

/// Runs a scenario without touching the disk.
pub fn simulate(cfg: &ScenarioConfig) -> Result<Simulation> {
    simulate_with(cfg, |_, _| {})
}

/// [`simulate`], calling `on_iter` with every iterate including the first.
pub fn simulate_with(
    cfg: &ScenarioConfig,
    mut on_iter: impl FnMut(&IterateSummary, &State),
) -> Result<Simulation> {
    let stepper = Stepper::new(cfg)?;
    let mut state = stepper.initial()?;
    let mut summaries = vec![stepper.summarize(&state)];
    on_iter(&summaries[0], &state);
    for _ in 0..cfg.n_iterations {
        state = stepper.step(&state)?;
        let s = stepper.summarize(&state);
        on_iter(&s, &state);
        summaries.push(s);
    }
    let classification = stepper.classify(&summaries);
    Ok(Simulation {
        summaries,
        classification,
        last: state,
    })
}

/// Exclusive ownership of a run directory; released on drop.
#[derive(Debug)]
pub struct RunLock {
    path: PathBuf,
}

fn process_alive(pid: u32) -> bool {
    let proc = Path::new("/proc");
    if !proc.is_dir() {
        // no way to tell; assume the owner is still there
        return true;
    }
    proc.join(pid.to_string()).exists()
}

impl RunLock {
    /// Takes the lock, replacing a lock left by a process that has exited.
    pub fn acquire(dir: &Path) -> Result<Self> {
        let path = dir.join(LOCK_FILE);
        if let Ok(text) = fs::read_to_string(&path) {
            if let Ok(pid) = text.trim().parse::<u32>() {
                if process_alive(pid) {
                    return Err(Error::Locked(dir.to_path_buf()));
                }
            }
        }
        fs::write(&path, format!("{}\n", std::process::id())).map_err(|e| Error::io(&path, e))?;
        Ok(Self { path })
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

fn iter_dir(dir: &Path, generation: usize) -> PathBuf {
    dir.join(format!("iter_{generation}"))
}

#[derive(Debug, Serialize, Deserialize)]
struct Checkpoint {
    generation: usize,
    engine: Engine,
    /// Particle count and coordinates per particle; the coordinates live in
    /// `population.bin` as little-endian f64.
    n: usize,
    dim: usize,
    lineage: Option<Lineage>,
    weights: Option<Vec<f64>>,
    step_seconds: Vec<f64>,
}

fn save_state(dir: &Path, state: &State, step_seconds: &[f64]) -> Result<()> {
    let sdir = dir.join(STATE_DIR);
    fs::create_dir_all(&sdir).map_err(|e| Error::io(&sdir, e))?;
    let cp = match state {
        State::Particles(pop) => {
            let bytes: Vec<u8> = pop.coords().iter().flat_map(|x| x.to_le_bytes()).collect();
            write_atomic(&sdir.join(POPULATION_FILE), &bytes)?;
            Checkpoint {
                generation: pop.generation,
                engine: Engine::Mc,
                n: pop.len(),
                dim: pop.dim(),
                lineage: Some(pop.lineage.clone()),
                weights: None,
                step_seconds: step_seconds.to_vec(),
            }
        }
        State::Weights { theta, generation } => Checkpoint {
            generation: *generation,
            engine: Engine::Exact,
            n: theta.len(),
            dim: 1,
            lineage: None,
            weights: Some(theta.weights().to_vec()),
            step_seconds: step_seconds.to_vec(),
        },
    };
    write_json(&sdir.join(CHECKPOINT_FILE), &cp)
}

fn load_state(dir: &Path, cfg: &ScenarioConfig) -> Result<(State, Vec<f64>)> {
    let sdir = dir.join(STATE_DIR);
    let cp: Checkpoint = read_json(&sdir.join(CHECKPOINT_FILE))?;
    if cp.engine != cfg.engine {
        return Err(Error::InvalidScenario(
            "checkpoint engine differs from config".into(),
        ));
    }
    let state = match cp.engine {
        Engine::Exact => State::Weights {
            theta: Distribution::new(cp.weights.unwrap_or_default())?,
            generation: cp.generation,
        },
        Engine::Mc => {
            let path = sdir.join(POPULATION_FILE);
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            if bytes.len() != cp.n * cp.dim * 8 || cp.dim != cfg.space.dim() || cp.n == 0 {
                return Err(Error::InvalidScenario(format!(
                    "{} does not match its checkpoint",
                    path.display()
                )));
            }
            let coords = bytes
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
                .collect();
            let mut pop =
                ParticlePopulation::new(cfg.space.clone(), coords, cp.generation, cfg.master_seed);
            pop.lineage = cp.lineage.unwrap_or_default();
            State::Particles(pop)
        }
    };
    Ok((state, cp.step_seconds))
}

fn write_samples(dir: &Path, cfg: &ScenarioConfig, state: &State) -> Result<()> {
    let path = dir.join("samples.csv");
    let mut w = csv::Writer::from_path(&path)?;
    match state {
        State::Weights { theta, .. } => {
            w.write_record(["index", "weight"])?;
            for (i, p) in theta.weights().iter().enumerate() {
                w.write_record([i.to_string(), p.to_string()])?;
            }
        }
        State::Particles(pop) => {
            let dim = pop.dim();
            if dim == 1 {
                w.write_record(["x"])?;
            } else {
                w.write_record((0..dim).map(|d| format!("x{d}")))?;
            }
            let n = pop.len();
            let rows: Vec<usize> = if cfg.store_full || n <= cfg.sample_cap {
                (0..n).collect()
            } else {
                let seed = derive_seed(cfg.master_seed, &[THIN_TAG]);
                let mut rng = stream_rng(seed, pop.generation as u64);
                let mut picked = index::sample(&mut rng, n, cfg.sample_cap).into_vec();
                picked.sort_unstable();
                picked
            };
            for i in rows {
                w.write_record(pop.point(i).iter().map(|x| x.to_string()))?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

fn write_iterate(
    dir: &Path,
    cfg: &ScenarioConfig,
    summary: &IterateSummary,
    state: &State,
) -> Result<()> {
    let idir = iter_dir(dir, summary.generation);
    fs::create_dir_all(&idir).map_err(|e| Error::io(&idir, e))?;
    write_json(&idir.join("summary.json"), summary)?;
    if cfg.store_samples {
        write_samples(&idir, cfg, state)?;
    }
    Ok(())
}

fn joined(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Writes `summaries.csv`; `classification` is the limit named from the
/// trajectory up to each row.
fn write_summaries_csv(
    path: &Path,
    summaries: &[IterateSummary],
    classifications: &[String],
) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let mut header = vec![
            "generation".to_string(),
            "n".into(),
            "mean".into(),
            "sd".into(),
        ];
        header.extend(
            diagnostics::QUANTILE_LEVELS
                .iter()
                .map(|q| format!("q{:02}", (q * 100.0).round() as u32)),
        );
        header.extend(
            [
                "cluster_count",
                "centers",
                "masses",
                "inter_cluster_distance",
                "chain_steps",
                "classification",
            ]
            .map(String::from),
        );
        w.write_record(&header)?;
        for (s, c) in summaries.iter().zip(classifications) {
            let mut row = vec![
                s.generation.to_string(),
                s.n.to_string(),
                joined(&s.mean),
                s.sd.to_string(),
            ];
            row.extend(s.quantiles.iter().map(|q| q.to_string()));
            row.push(s.clusters.count.to_string());
            row.push(joined(&s.clusters.centers));
            row.push(joined(&s.clusters.masses));
            row.push(
                s.inter_cluster_distance
                    .map(|d| d.to_string())
                    .unwrap_or_default(),
            );
            row.push(s.chain_steps.to_string());
            row.push(c.clone());
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    write_atomic(path, &buf)
}

fn read_summaries(dir: &Path, last: usize) -> Result<Vec<IterateSummary>> {
    (0..=last)
        .map(|g| read_json(&iter_dir(dir, g).join("summary.json")))
        .collect()
}

fn clear_run_files(dir: &Path) -> Result<()> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let path = entry.path();
        let res = if name.starts_with("iter_") || name == STATE_DIR {
            fs::remove_dir_all(&path)
        } else if [SUMMARIES_FILE, ARTIFACT_FILE].contains(&name.as_str()) {
            fs::remove_file(&path)
        } else {
            Ok(())
        };
        res.map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Runs `cfg` in its default directory (see [`ScenarioConfig::default_dir`]).
pub fn run_iterative(cfg: &ScenarioConfig) -> Result<RunArtifact> {
    run_in(cfg, &cfg.default_dir(), |_| {})
}

/// Runs `cfg` in `dir`, calling `on_iter` after each iterate is on disk.
///
/// An existing run in `dir` is replaced; a non-empty directory that holds
/// no run is refused.
pub fn run_in(
    cfg: &ScenarioConfig,
    dir: &Path,
    on_iter: impl FnMut(&IterateSummary),
) -> Result<RunArtifact> {
    let stepper = Stepper::new(cfg)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let _lock = RunLock::acquire(dir)?;
    let has_run = dir.join(CONFIG_FILE).exists();
    let foreign = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok())
        .any(|e| e.file_name() != LOCK_FILE);
    if foreign && !has_run {
        return Err(Error::InvalidArgument(format!(
            "{} is not empty and holds no run",
            dir.display()
        )));
    }
    clear_run_files(dir)?;
    write_atomic(
        &dir.join(CONFIG_FILE),
        format!("{}\n", cfg.to_json()).as_bytes(),
    )?;

    let state = stepper.initial()?;
    let summary = stepper.summarize(&state);
    write_iterate(dir, cfg, &summary, &state)?;
    drive(&stepper, dir, state, vec![summary], Vec::new(), on_iter)
}

/// Continues the run in `dir` from its last checkpoint. `iterations`, when
/// given, replaces the configured total and is echoed into `config.json`.
pub fn resume(dir: &Path, iterations: Option<usize>) -> Result<RunArtifact> {
    resume_with(dir, iterations, |_| {})
}

pub fn resume_with(
    dir: &Path,
    iterations: Option<usize>,
    on_iter: impl FnMut(&IterateSummary),
) -> Result<RunArtifact> {
    let _lock = RunLock::acquire(dir)?;
    let mut cfg = ScenarioConfig::read(dir.join(CONFIG_FILE))?;
    if let Some(n) = iterations {
        cfg.n_iterations = n;
        write_atomic(
            &dir.join(CONFIG_FILE),
            format!("{}\n", cfg.to_json()).as_bytes(),
        )?;
    }
    let stepper = Stepper::new(&cfg)?;
    let (state, step_seconds) = load_state(dir, &cfg)?;
    let summaries = read_summaries(dir, state.generation())?;
    // iterates past the checkpoint are stale
    for g in state.generation() + 1.. {
        let d = iter_dir(dir, g);
        if !d.exists() {
            break;
        }
        fs::remove_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    drive(&stepper, dir, state, summaries, step_seconds, on_iter)
}

fn drive(
    stepper: &Stepper,
    dir: &Path,
    mut state: State,
    mut summaries: Vec<IterateSummary>,
    mut step_seconds: Vec<f64>,
    mut on_iter: impl FnMut(&IterateSummary),
) -> Result<RunArtifact> {
    let cfg = stepper.cfg;
    let csv_path = dir.join(SUMMARIES_FILE);
    let mut classes: Vec<String> = (1..=summaries.len())
        .map(|n| stepper.classify(&summaries[..n]).limit.name().to_string())
        .collect();
    if state.generation() == 0 && step_seconds.is_empty() {
        save_state(dir, &state, &step_seconds)?;
        write_summaries_csv(&csv_path, &summaries, &classes)?;
        on_iter(&summaries[0]);
    }
    while state.generation() < cfg.n_iterations {
        let t = Instant::now();
        state = stepper.step(&state)?;
        step_seconds.push(t.elapsed().as_secs_f64());
        let s = stepper.summarize(&state);
        write_iterate(dir, cfg, &s, &state)?;
        summaries.push(s);
        classes.push(stepper.classify(&summaries).limit.name().to_string());
        save_state(dir, &state, &step_seconds)?;
        write_summaries_csv(&csv_path, &summaries, &classes)?;
        on_iter(summaries.last().expect("non-empty"));
    }
    let artifact = assemble(stepper, summaries, step_seconds);
    write_json(&dir.join(ARTIFACT_FILE), &artifact)?;
    Ok(artifact)
}

fn assemble(
    stepper: &Stepper,
    summaries: Vec<IterateSummary>,
    step_seconds: Vec<f64>,
) -> RunArtifact {
    let cfg = stepper.cfg;
    let classification = stepper.classify(&summaries);
    let sds: Vec<f64> = summaries.iter().map(|s| s.sd).collect();
    let decay_fit = diagnostics::fit_decay(&sds, DECAY_BURN_IN, false).ok();
    let warnings = summaries
        .iter()
        .flat_map(|s| s.flags.iter().filter(|f| *f != "degenerate").cloned())
        .collect();
    RunArtifact {
        config: cfg.clone(),
        method: match cfg.engine {
            Engine::Exact => EXACT_METHOD.into(),
            Engine::Mc => MC_METHOD.into(),
        },
        summaries,
        classification,
        decay_fit,
        timing: Timing {
            total_seconds: step_seconds.iter().sum(),
            step_seconds,
        },
        warnings,
    }
}

/// Reads a finished or interrupted run.
pub fn load_artifact(dir: &Path) -> Result<RunArtifact> {
    let path = dir.join(ARTIFACT_FILE);
    if path.exists() {
        return read_json(&path);
    }
    let cfg = ScenarioConfig::read(dir.join(CONFIG_FILE))?;
    let stepper = Stepper::new(&cfg)?;
    let (state, step_seconds) = load_state(dir, &cfg)?;
    let summaries = read_summaries(dir, state.generation())?;
    Ok(assemble(&stepper, summaries, step_seconds))
}

/// Re-runs the diagnostics of a run from its config and checkpoint.
pub fn classify_run(dir: &Path) -> Result<LimitReport> {
    let cfg = ScenarioConfig::read(dir.join(CONFIG_FILE))?;
    let stepper = Stepper::new(&cfg)?;
    let (state, _) = load_state(dir, &cfg)?;
    let mut summaries = read_summaries(dir, state.generation())?;
    let fresh = stepper.summarize(&state);
    *summaries.last_mut().expect("non-empty") = fresh;
    Ok(stepper.classify(&summaries))
}

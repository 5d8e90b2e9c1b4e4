//! The `nearmap` command line.
//!
//! Exit codes: 0 success, 2 usage error, 3 invalid input, 4 runtime or I/O
//! failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::binomial;
use crate::error::{Error, Result};
use crate::exact::{
    apply_pi, brute_force_kernel, btl_scan, build_kernel, feasibility_search, find_fixed_points,
    iterate_exact, Distribution, RankMatrix, SearchConfig, DEFAULT_MARGIN,
};
use crate::io::read_matrix_csv;
use crate::run;
use crate::scenario::{bundled_scenario, bundled_scenarios, ScenarioConfig, SCENARIO_SCHEMA};
use crate::spaces::{rank_matrix_from_distances, Space};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "nearmap",
    version,
    about = "Iterate the jump-to-the-j'th-closest-of-k map"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// The map on a two-point space.
    #[command(subcommand)]
    Binomial(BinomialCmd),
    /// Exact computations on finite spaces.
    #[command(subcommand)]
    Finite(FiniteCmd),
    /// Iterated runs with persisted artifacts.
    #[command(subcommand)]
    Mc(McCmd),
    /// The bundled scenario catalogue.
    #[command(subcommand)]
    Scenarios(ScenarioCmd),
}

#[derive(Debug, Subcommand)]
enum BinomialCmd {
    /// Classification of every (j, k) with k <= kmax, as CSV.
    Table {
        #[arg(long, default_value_t = 9)]
        kmax: usize,
        #[arg(long)]
        json: bool,
    },
    Classify {
        #[arg(long)]
        j: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        json: bool,
    },
    /// One application of the map to (p, 1 - p).
    Map {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        j: usize,
        #[arg(long)]
        k: usize,
        /// Print the whole trajectory of this many iterations instead.
        #[arg(long)]
        iterate: Option<usize>,
    },
    /// Whether the sufficient condition for no invariant density holds.
    Nonexistence {
        #[arg(long)]
        j: usize,
        #[arg(long)]
        k: usize,
    },
}

#[derive(Debug, Args)]
struct FiniteInput {
    /// Bundled scenario supplying the space, weights, j and k.
    #[arg(long)]
    scenario: Option<String>,
    /// Rank matrix CSV (1-based ranks, one row per point).
    #[arg(long, conflicts_with_all = ["scenario", "distances", "points"])]
    ranks: Option<PathBuf>,
    /// Symmetric distance table CSV.
    #[arg(long, conflicts_with_all = ["scenario", "points"])]
    distances: Option<PathBuf>,
    /// Euclidean point coordinates CSV, one point per row.
    #[arg(long, conflicts_with = "scenario")]
    points: Option<PathBuf>,
    /// File holding the weights as a JSON array or a CSV row/column; defaults to the
    /// scenario's initial law, else uniform.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    j: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum FiniteCmd {
    /// Transition matrix of the chain driven by the weights.
    Kernel {
        #[command(flatten)]
        input: FiniteInput,
        /// Enumerate all k-tuples instead of the closed form.
        #[arg(long)]
        brute_force: bool,
        /// Also write the matrix as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stationary law of that chain, i.e. one application of the map.
    Stationary {
        #[command(flatten)]
        input: FiniteInput,
    },
    /// Applies the map repeatedly and prints the trajectory.
    Iterate {
        #[command(flatten)]
        input: FiniteInput,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Multi-start search for fixed points, with their stability.
    FixedPoints {
        #[command(flatten)]
        input: FiniteInput,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Search for a distance table realizing a rank matrix.
    Feasibility {
        #[command(flatten)]
        input: FiniteInput,
        #[arg(long, default_value_t = DEFAULT_MARGIN)]
        margin: f64,
    },
    /// Look for non-uniform full-support fixed points on random BTL spaces.
    BtlScan {
        #[arg(long)]
        leaves: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long)]
        k: usize,
        /// Scan only this j; default is every 1 <= j <= k.
        #[arg(long)]
        j: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
struct RunOverrides {
    #[arg(long)]
    j: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    particles: Option<usize>,
    /// Run directory; default is $NEARMAP_RUNS_DIR/<name> or runs/<name>.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress per-iterate progress on stderr.
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum McCmd {
    Run {
        #[arg(
            long,
            required_unless_present = "scenario",
            conflicts_with = "scenario"
        )]
        config: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<String>,
        #[command(flatten)]
        overrides: RunOverrides,
    },
    /// Continue an interrupted or finished run.
    Resume {
        run_dir: PathBuf,
        /// New total number of iterations.
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        quiet: bool,
    },
    /// Re-run the limit diagnostics of a run.
    Classify { run_dir: PathBuf },
}

#[derive(Debug, Subcommand)]
enum ScenarioCmd {
    List,
    Show {
        name: String,
    },
    /// Write every bundled scenario as `<name>.json` into a directory.
    Export {
        dir: PathBuf,
    },
    /// Print the JSON schema of scenario files.
    Schema,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                EXIT_INVALID
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Binomial(c) => binomial_cmd(c),
        Command::Finite(c) => finite_cmd(c),
        Command::Mc(c) => mc_cmd(c),
        Command::Scenarios(c) => scenario_cmd(c),
    }
}

/// Writes a line to stdout; a reader that went away is not an error.
fn emit(line: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{line}").and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::io("<stdout>", e)),
        _ => Ok(()),
    }
}

macro_rules! out {
    ($($t:tt)*) => {
        emit(&format!($($t)*))?
    };
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    emit(&serde_json::to_string_pretty(value)?)
}

fn binomial_cmd(cmd: BinomialCmd) -> Result<()> {
    match cmd {
        BinomialCmd::Table { kmax, json } => {
            let rows = binomial::classification_table(kmax)?;
            if json {
                print_json(&rows)
            } else {
                let mut buf = Vec::new();
                binomial::write_table_csv(&rows, &mut buf)?;
                emit(String::from_utf8_lossy(&buf).trim_end())
            }
        }
        BinomialCmd::Classify { j, k, json } => {
            let c = binomial::classify(j, k)?;
            if json {
                return print_json(&c);
            }
            match c.p_crit {
                Some(p) => out!("type={} p_crit={p:.5}", c.kind),
                None => out!("type={}", c.kind),
            }
            Ok(())
        }
        BinomialCmd::Map { p, j, k, iterate } => {
            match iterate {
                Some(n) => {
                    for x in binomial::iterate_map(p, j, k, n)? {
                        out!("{x}");
                    }
                }
                None => out!("{}", binomial::binomial_map(p, j, k)?),
            }
            Ok(())
        }
        BinomialCmd::Nonexistence { j, k } => {
            out!("{}", binomial::density_nonexistence_check(j, k)?);
            Ok(())
        }
    }
}

/// A finite space with weights and order resolved from the CLI inputs.
struct FiniteProblem {
    source: String,
    ranks: RankMatrix,
    theta: Distribution,
    j: Option<usize>,
    k: Option<usize>,
}

impl FiniteProblem {
    fn order(&self) -> Result<(usize, usize)> {
        match (self.j, self.k) {
            (Some(j), Some(k)) => Ok((j, k)),
            _ => Err(Error::InvalidArgument(
                "--j and --k are required without a scenario".into(),
            )),
        }
    }

    fn echo(&self, j: usize, k: usize) -> serde_json::Value {
        json!({
            "source": self.source,
            "rank_matrix": self.ranks.rows(),
            "theta": self.theta.weights(),
            "j": j,
            "k": k,
        })
    }
}

fn read_weights(path: &Path) -> Result<Distribution> {
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let w: Vec<f64> = if is_json {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)?
    } else {
        read_matrix_csv(path)?.concat()
    };
    Distribution::new(w)
}

fn resolve(input: &FiniteInput) -> Result<FiniteProblem> {
    let (source, ranks, mut theta, mut j, mut k) = if let Some(name) = &input.scenario {
        let s = bundled_scenario(name)?;
        let ranks = s.space.rank_matrix()?;
        let theta = s.initial.finite_weights(&s.space)?;
        (
            format!("scenario:{name}"),
            ranks,
            Some(theta),
            Some(s.j),
            Some(s.k),
        )
    } else if let Some(p) = &input.ranks {
        (
            p.display().to_string(),
            RankMatrix::read_csv(p)?,
            None,
            None,
            None,
        )
    } else if let Some(p) = &input.distances {
        (
            p.display().to_string(),
            rank_matrix_from_distances(&read_matrix_csv(p)?)?,
            None,
            None,
            None,
        )
    } else if let Some(p) = &input.points {
        (
            p.display().to_string(),
            Space::point_cloud_from_csv(p)?.rank_matrix()?,
            None,
            None,
            None,
        )
    } else {
        return Err(Error::InvalidArgument(
            "one of --scenario, --ranks, --distances or --points is required".into(),
        ));
    };
    if let Some(p) = &input.weights {
        theta = Some(read_weights(p)?);
    }
    let theta = theta.unwrap_or_else(|| Distribution::uniform(ranks.n()));
    if theta.len() != ranks.n() {
        return Err(Error::DimensionMismatch {
            expected: ranks.n(),
            got: theta.len(),
        });
    }
    j = input.j.or(j);
    k = input.k.or(k);
    Ok(FiniteProblem {
        source,
        ranks,
        theta,
        j,
        k,
    })
}

fn finite_cmd(cmd: FiniteCmd) -> Result<()> {
    match cmd {
        FiniteCmd::Kernel {
            input,
            brute_force,
            out,
        } => {
            let p = resolve(&input)?;
            let (j, k) = p.order()?;
            let kernel = if brute_force || p.ranks.has_ties() {
                brute_force_kernel(&p.ranks, &p.theta, j, k)?
            } else {
                build_kernel(&p.ranks, &p.theta, j, k)?
            };
            if let Some(path) = out {
                kernel.write_csv(path)?;
            }
            print_json(&json!({ "input": p.echo(j, k), "kernel": kernel.rows() }))
        }
        FiniteCmd::Stationary { input } => {
            let p = resolve(&input)?;
            let (j, k) = p.order()?;
            let pi = apply_pi(&p.ranks, &p.theta, j, k)?;
            let residual = pi.l1_distance(&p.theta);
            print_json(&json!({
                "input": p.echo(j, k),
                "pi": pi.weights(),
                "l1_change": residual,
            }))
        }
        FiniteCmd::Iterate { input, steps } => {
            let p = resolve(&input)?;
            let (j, k) = p.order()?;
            let traj = iterate_exact(&p.ranks, &p.theta, j, k, steps)?;
            let rows: Vec<&[f64]> = traj.iter().map(|d| d.weights()).collect();
            print_json(&json!({ "input": p.echo(j, k), "trajectory": rows }))
        }
        FiniteCmd::FixedPoints {
            input,
            restarts,
            tol,
            seed,
        } => {
            let p = resolve(&input)?;
            let (j, k) = p.order()?;
            let cfg = SearchConfig {
                n_restarts: restarts,
                tol,
                seed,
                ..SearchConfig::default()
            };
            let found = find_fixed_points(&p.ranks, j, k, &cfg)?;
            print_json(&json!({ "input": p.echo(j, k), "search": cfg, "fixed_points": found }))
        }
        FiniteCmd::Feasibility { input, margin } => {
            let p = resolve(&input)?;
            let witness = feasibility_search(&p.ranks, margin);
            print_json(&json!({
                "source": p.source,
                "rank_matrix": p.ranks.rows(),
                "margin": margin,
                "feasible": witness.is_some(),
                "distances": witness,
            }))
        }
        FiniteCmd::BtlScan {
            leaves,
            trials,
            k,
            j,
            seed,
        } => {
            let js: Vec<usize> = match j {
                Some(j) => vec![j],
                None => (1..=k).collect(),
            };
            let reports = js
                .into_iter()
                .map(|j| btl_scan(leaves, trials, j, k, seed))
                .collect::<Result<Vec<_>>>()?;
            let total: usize = reports.iter().map(|r| r.findings.len()).sum();
            print_json(&json!({
                "leaves": leaves,
                "trials": trials,
                "k": k,
                "seed": seed,
                "edge_lengths": "uniform(0.5, 1.5) on a uniform random binary tree shape",
                "non_omnipresent_full_support": total,
                "scans": reports,
            }))
        }
    }
}

fn progress(quiet: bool) -> impl FnMut(&crate::diagnostics::IterateSummary) {
    move |s| {
        if !quiet {
            eprintln!(
                "iter {:>4}  sd {:.6e}  clusters {}  steps {}",
                s.generation, s.sd, s.clusters.count, s.chain_steps
            );
        }
    }
}

fn report_run(dir: &Path, artifact: &run::RunArtifact) -> Result<()> {
    print_json(&json!({
        "run_dir": dir,
        "generations": artifact.summaries.len().saturating_sub(1),
        "classification": artifact.classification,
        "decay_fit": artifact.decay_fit,
        "warnings": artifact.warnings,
    }))
}

fn mc_cmd(cmd: McCmd) -> Result<()> {
    match cmd {
        McCmd::Run {
            config,
            scenario,
            overrides: o,
        } => {
            let mut cfg = match (config, scenario) {
                (Some(path), _) => ScenarioConfig::read(path)?,
                (None, Some(name)) => bundled_scenario(&name)?,
                (None, None) => unreachable!("clap requires one of them"),
            };
            if let Some(j) = o.j {
                cfg.j = j;
            }
            if let Some(k) = o.k {
                cfg.k = k;
            }
            if let Some(s) = o.seed {
                cfg.master_seed = s;
            }
            if let Some(n) = o.iterations {
                cfg.n_iterations = n;
            }
            if let Some(n) = o.particles {
                cfg.n_particles = n;
            }
            if let Some(d) = o.out {
                cfg.output_dir = Some(d);
            }
            cfg.validate()?;
            let dir = cfg.default_dir();
            let artifact = run::run_in(&cfg, &dir, progress(o.quiet))?;
            report_run(&dir, &artifact)
        }
        McCmd::Resume {
            run_dir,
            iterations,
            quiet,
        } => {
            let artifact = run::resume_with(&run_dir, iterations, progress(quiet))?;
            report_run(&run_dir, &artifact)
        }
        McCmd::Classify { run_dir } => print_json(&run::classify_run(&run_dir)?),
    }
}

fn scenario_cmd(cmd: ScenarioCmd) -> Result<()> {
    match cmd {
        ScenarioCmd::List => {
            for s in bundled_scenarios() {
                out!(
                    "{}\t{}\t{}\tj={} k={}\t{:?}",
                    s.name,
                    s.space.name(),
                    s.initial.name(),
                    s.j,
                    s.k,
                    s.engine
                );
            }
            Ok(())
        }
        ScenarioCmd::Show { name } => {
            out!("{}", bundled_scenario(&name)?.to_json());
            Ok(())
        }
        ScenarioCmd::Export { dir } => {
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            for s in bundled_scenarios() {
                let path = dir.join(format!("{}.json", s.name));
                fs::write(&path, format!("{}\n", s.to_json())).map_err(|e| Error::io(&path, e))?;
            }
            Ok(())
        }
        ScenarioCmd::Schema => {
            out!("{}", SCENARIO_SCHEMA.trim_end());
            Ok(())
        }
    }
}

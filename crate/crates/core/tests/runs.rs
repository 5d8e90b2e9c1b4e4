use std::fs;
use std::path::Path;

use nearmap::diagnostics::LimitKind;
use nearmap::run::{classify_run, load_artifact, resume, run_in, RunLock};
use nearmap::scenario::{bundled_scenario, ScenarioConfig};
use nearmap::spaces::{InitialDistributionSpec, Space};
use nearmap::Error;

fn small(name: &str, iterations: usize) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(
        name,
        Space::Interval,
        InitialDistributionSpec::Tilted,
        2,
        3,
        iterations,
    );
    cfg.n_particles = 3_000;
    cfg.sample_cap = 500;
    cfg.master_seed = 17;
    cfg
}

fn read(path: impl AsRef<Path>) -> String {
    fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

#[test]
fn run_directory_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let mut seen = Vec::new();
    let art = run_in(&small("layout", 3), &dir, |s| seen.push(s.generation)).unwrap();
    assert_eq!(seen, [0, 1, 2, 3]);
    assert_eq!(art.summaries.len(), 4);
    for name in [
        "config.json",
        "summaries.csv",
        "artifact.json",
        "state/checkpoint.json",
        "state/population.bin",
    ] {
        assert!(dir.join(name).is_file(), "{name} missing");
    }
    assert!(!dir.join("run.lock").exists());
    for g in 0..=3 {
        let samples = read(dir.join(format!("iter_{g}/samples.csv")));
        let mut lines = samples.lines();
        assert_eq!(lines.next(), Some("x"));
        let xs: Vec<f64> = lines.map(|l| l.parse().unwrap()).collect();
        assert_eq!(xs.len(), 500);
        assert!(xs.iter().all(|x| (0.0..=1.0).contains(x)));
        assert!(dir.join(format!("iter_{g}/summary.json")).is_file());
    }
    let csv = read(dir.join("summaries.csv"));
    assert!(csv.starts_with("generation,n,mean,sd,"));
    assert_eq!(csv.lines().count(), 5);
    assert_eq!(load_artifact(&dir).unwrap().summaries, art.summaries);
}

#[test]
fn resume_matches_an_uninterrupted_run() {
    let tmp = tempfile::tempdir().unwrap();
    let (whole, parts) = (tmp.path().join("whole"), tmp.path().join("parts"));
    run_in(&small("resume", 5), &whole, |_| {}).unwrap();
    run_in(&small("resume", 2), &parts, |_| {}).unwrap();
    let art = resume(&parts, Some(5)).unwrap();
    assert_eq!(art.config.n_iterations, 5);
    assert_eq!(
        read(whole.join("summaries.csv")),
        read(parts.join("summaries.csv"))
    );
    for g in 0..=5 {
        for f in ["summary.json", "samples.csv"] {
            let rel = format!("iter_{g}/{f}");
            assert_eq!(read(whole.join(&rel)), read(parts.join(&rel)), "{rel}");
        }
    }
    assert_eq!(
        read(whole.join("config.json")),
        read(parts.join("config.json"))
    );
}

#[test]
fn config_echo_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_in(&small("echo", 3), &a, |_| {}).unwrap();
    let echoed = ScenarioConfig::read(a.join("config.json")).unwrap();
    run_in(&echoed, &b, |_| {}).unwrap();
    assert_eq!(read(a.join("summaries.csv")), read(b.join("summaries.csv")));
    assert_eq!(
        read(a.join("iter_3/samples.csv")),
        read(b.join("iter_3/samples.csv"))
    );
}

#[test]
fn rerun_replaces_an_old_run_but_not_foreign_files() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    run_in(&small("again", 4), &dir, |_| {}).unwrap();
    run_in(&small("again", 2), &dir, |_| {}).unwrap();
    assert!(!dir.join("iter_3").exists());

    let other = tmp.path().join("other");
    fs::create_dir(&other).unwrap();
    fs::write(other.join("notes.txt"), "keep").unwrap();
    assert!(matches!(
        run_in(&small("x", 1), &other, |_| {}),
        Err(Error::InvalidArgument(_))
    ));
    assert_eq!(read(other.join("notes.txt")), "keep");
}

#[test]
fn locks() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    run_in(&small("lock", 1), &dir, |_| {}).unwrap();

    let held = RunLock::acquire(&dir).unwrap();
    assert!(matches!(resume(&dir, Some(2)), Err(Error::Locked(_))));
    assert!(matches!(
        run_in(&small("lock", 2), &dir, |_| {}),
        Err(Error::Locked(_))
    ));
    drop(held);
    assert!(!dir.join("run.lock").exists());

    // a pid above the kernel's pid_max cannot be running
    fs::write(dir.join("run.lock"), "4294967295\n").unwrap();
    let art = resume(&dir, Some(2)).unwrap();
    assert_eq!(art.summaries.len(), 3);
    assert!(!dir.join("run.lock").exists());
}

#[test]
fn exact_engine_writes_weights() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("five");
    let mut cfg = bundled_scenario("paper-5pt").unwrap();
    cfg.n_iterations = 4;
    let art = run_in(&cfg, &dir, |_| {}).unwrap();
    let samples = read(dir.join("iter_4/samples.csv"));
    let mut lines = samples.lines();
    assert_eq!(lines.next(), Some("index,weight"));
    let total: f64 = lines
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(classify_run(&dir).unwrap().limit, art.classification.limit);

    let cont = tmp.path().join("cont");
    cfg.n_iterations = 2;
    run_in(&cfg, &cont, |_| {}).unwrap();
    resume(&cont, Some(4)).unwrap();
    assert_eq!(
        read(dir.join("summaries.csv")),
        read(cont.join("summaries.csv"))
    );
}

#[test]
fn point_mass_run_stays_put() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small("atom", 3);
    cfg.initial = InitialDistributionSpec::PointMass {
        location: vec![0.3],
    };
    let art = run_in(&cfg, tmp.path(), |_| {}).unwrap();
    for s in &art.summaries {
        assert!((s.mean[0] - 0.3).abs() < 1e-12);
        assert_eq!(s.sd, 0.0);
    }
    assert_eq!(art.classification.limit, LimitKind::OnePoint { s: 0.3 });
    assert!(read(tmp.path().join("iter_3/samples.csv"))
        .lines()
        .skip(1)
        .all(|l| l == "0.3"));
}

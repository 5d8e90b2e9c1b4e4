use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nearmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nearmap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = nearmap(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

#[test]
fn binomial_commands() {
    assert_eq!(
        stdout(&["binomial", "classify", "--j", "1", "--k", "2"]).trim(),
        "type=I"
    );
    let c = json(&["binomial", "classify", "--j", "4", "--k", "5", "--json"]);
    assert_eq!(c["type"], "III");
    assert!((c["p_crit"].as_f64().unwrap() - 0.17267316).abs() < 1e-6);

    let half: f64 = stdout(&["binomial", "map", "--p", "0.5", "--j", "3", "--k", "7"])
        .trim()
        .parse()
        .unwrap();
    assert_eq!(half, 0.5);

    let table = stdout(&["binomial", "table", "--kmax", "9"]);
    assert_eq!(table.lines().next(), Some("k,j,type,p_crit"));
    assert_eq!(table.lines().count(), 1 + (2..=9).sum::<usize>());
}

#[test]
fn finite_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let ranks = tmp.path().join("r.csv");
    let weights = tmp.path().join("w.json");
    fs::write(&ranks, "1,2,3\n2,1,3\n3,2,1\n").unwrap();
    fs::write(&weights, "[0.2, 0.3, 0.5]").unwrap();
    let (r, w) = (ranks.to_str().unwrap(), weights.to_str().unwrap());

    let k = json(&[
        "finite",
        "kernel",
        "--ranks",
        r,
        "--weights",
        w,
        "--j",
        "2",
        "--k",
        "3",
    ]);
    for row in k["kernel"].as_array().unwrap() {
        let s: f64 = row
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    let s = json(&["finite", "stationary", "--scenario", "paper-R2"]);
    assert!(s["l1_change"].as_f64().unwrap() < 1e-12);

    let fp = json(&["finite", "fixed-points", "--scenario", "paper-5pt"]);
    let found = fp["fixed_points"].as_array().unwrap();
    assert!(found
        .iter()
        .any(|f| f["support_size"] == 5 && f["stability"] == "unstable"));

    let it = json(&[
        "finite",
        "iterate",
        "--ranks",
        r,
        "--weights",
        w,
        "--j",
        "1",
        "--k",
        "2",
        "--steps",
        "3",
    ]);
    assert_eq!(it["trajectory"].as_array().unwrap().len(), 4);

    let f = json(&["finite", "feasibility", "--scenario", "paper-R2"]);
    assert!(f["distances"].is_array());

    let scan = json(&[
        "finite", "btl-scan", "--leaves", "4", "--trials", "3", "--k", "2",
    ]);
    assert_eq!(scan["non_omnipresent_full_support"], 0);
}

#[test]
fn exit_codes() {
    assert_eq!(
        nearmap(&["binomial", "classify", "--j", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        nearmap(&["binomial", "classify", "--j", "4", "--k", "3"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        nearmap(&["binomial", "map", "--p", "1.5", "--j", "1", "--k", "2"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        nearmap(&["mc", "classify", "/nonexistent/run"])
            .status
            .code(),
        Some(4)
    );
    assert_eq!(
        nearmap(&["scenarios", "show", "no-such-scenario"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn mc_run_resume_classify() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let d = dir.to_str().unwrap();
    let args = [
        "mc",
        "run",
        "--scenario",
        "interval_u_k3_j2",
        "--particles",
        "2000",
        "--iterations",
        "2",
        "--seed",
        "5",
        "--out",
        d,
        "--quiet",
    ];
    let out = json(&args);
    assert_eq!(out["generations"], 2);
    assert!(Path::new(d).join("iter_2/samples.csv").is_file());

    let resumed = json(&["mc", "resume", d, "--iterations", "4", "--quiet"]);
    assert_eq!(resumed["generations"], 4);
    let c = json(&["mc", "classify", d]);
    assert_eq!(
        c["limit"]["kind"],
        resumed["classification"]["limit"]["kind"]
    );

    // the echoed config reproduces the run
    let again = tmp.path().join("again");
    json(&[
        "mc",
        "run",
        "--config",
        dir.join("config.json").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(
        fs::read_to_string(dir.join("summaries.csv")).unwrap(),
        fs::read_to_string(again.join("summaries.csv")).unwrap()
    );
}

#[test]
fn scenario_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let listed = stdout(&["scenarios", "list"]);
    stdout(&["scenarios", "export", tmp.path().to_str().unwrap()]);
    let files: Vec<_> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(files.len(), listed.lines().count());
    for f in files {
        let v: Value = serde_json::from_str(&fs::read_to_string(&f).unwrap()).unwrap();
        assert!(
            v["name"].is_string() && v["space"]["kind"].is_string(),
            "{}",
            f.display()
        );
    }
    let schema = json(&["scenarios", "schema"]);
    assert_eq!(schema["type"], "object");
    let show = json(&["scenarios", "show", "paper-5pt"]);
    assert_eq!(show["engine"], "exact");
}

use std::path::Path;
use std::process::{Command, Output};

use brdlab::load_instance;

const G1: &str = r#"{
  "version": 1,
  "model": "tabular",
  "n": 2,
  "m": 2,
  "cost_params": { "table": [[0.2, 0.5], [0.3, 0.4]] },
  "strategies": [[[0], [1]], [[0], [1]]]
}
"#;

/// Three players crowding one of three equal resources: several moves are
/// needed from the lexicographic start.
const CROWD: &str = r#"{
  "version": 1,
  "model": "tabular",
  "n": 3,
  "m": 3,
  "cost_params": { "table": [[0.1, 0.5, 0.9], [0.1, 0.5, 0.9], [0.1, 0.5, 0.9]] },
  "strategies": [[[0], [1], [2]], [[0], [1], [2]], [[0], [1], [2]]]
}
"#;

fn brdlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_brdlab"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("g1.json"), G1).unwrap();
    std::fs::write(dir.path().join("crowd.json"), CROWD).unwrap();
    dir
}

#[test]
fn brd_reports_a_converged_run() {
    let dir = setup();
    let out = brdlab(
        &[
            "brd",
            "--in",
            "crowd.json",
            "--epsilon",
            "0.1",
            "--pivot",
            "max_gain",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["status"], "converged");
    assert_eq!(v["iterations"], 2);
    assert_eq!(v["final_profile"], serde_json::json!([[1], [2], [0]]));
}

#[test]
fn brd_cap_hit_is_a_bound_violation() {
    let dir = setup();
    let out = brdlab(
        &[
            "brd",
            "--in",
            "crowd.json",
            "--epsilon",
            "0.1",
            "--max-iterations",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn invalid_instances_exit_with_two() {
    let dir = setup();
    std::fs::write(
        dir.path().join("bad.json"),
        G1.replace("\"version\": 1", "\"version\": 9"),
    )
    .unwrap();
    let out = brdlab(&["brd", "--in", "bad.json", "--epsilon", "0.1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("version 9"));

    std::fs::write(dir.path().join("bad.json"), G1.replace("0.5]", "\"x\"]")).unwrap();
    let out = brdlab(
        &["oracle", "--in", "bad.json", "--min-potential"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("line 6") && err.contains("cost_params.table[0][1]"),
        "{err}"
    );
}

#[test]
fn oracle_checks_profiles() {
    let dir = setup();
    let out = brdlab(
        &["oracle", "--in", "g1.json", "--check", "[[0],[0]]"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["is_alpha_pne"], false);
    assert!((v["potential"].as_f64().unwrap() - 0.7).abs() < 1e-12);

    let out = brdlab(
        &["oracle", "--in", "g1.json", "--min-potential"],
        dir.path(),
    );
    let v = stdout_json(&out);
    assert_eq!(v["min_potential_profile"], serde_json::json!([[0], [1]]));
    assert_eq!(v["is_alpha_pne"], true);

    let out = brdlab(
        &["oracle", "--in", "g1.json", "--check", "[[0],[2]]"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn perturb_writes_a_loadable_instance() {
    let dir = setup();
    let args = [
        "perturb", "--in", "g1.json", "--phi", "4", "--seed", "3", "--out", "p.json",
    ];
    assert_eq!(brdlab(&args, dir.path()).status.code(), Some(0));
    let a = load_instance(&dir.path().join("p.json")).unwrap();
    assert_eq!(brdlab(&args, dir.path()).status.code(), Some(0));
    assert_eq!(load_instance(&dir.path().join("p.json")).unwrap(), a);
    assert!(a.cost_row(0).iter().all(|&c| c > 0.0 && c <= 0.25));
}

#[test]
fn lemma_prints_estimate_and_bound() {
    let dir = setup();
    let args = [
        "lemma", "--mu", "2", "--alpha", "1", "--beta", "2", "--phi", "1", "--trials", "20000",
        "--seed", "1",
    ];
    let out = brdlab(&args, dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let mean = v["mean"].as_f64().unwrap();
    assert!((mean - (0.25 + 2.0 * 4f64.ln())).abs() < 0.1, "{mean}");
    assert!((v["bound"].as_f64().unwrap() - (6.0 * 2f64.ln() + 1.0)).abs() < 1e-12);
    let out = brdlab(
        &[
            "lemma", "--mu", "2", "--alpha", "0.5", "--beta", "2", "--phi", "1",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_reports_from_an_instance_file() {
    let dir = setup();
    std::fs::write(
        dir.path().join("config.json"),
        r#"{"model": "tabular", "skeleton": {"file": "g1.json"}, "phis": [1.0], "epsilons": [1.0],
            "pivots": ["first_improvement"], "trials": 10, "base_seed": 7}"#,
    )
    .unwrap();
    let out = brdlab(
        &["run", "--config", "config.json", "--out", "out"],
        dir.path(),
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(brdlab::experiment::CSV_HEADER));
    assert!(lines
        .next()
        .unwrap()
        .starts_with("tabular,2,2,1.0,1.0,first_improvement,10,"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/report.json")).unwrap())
            .unwrap();
    assert_eq!(json["cells"][0]["iterations"].as_array().unwrap().len(), 10);
    assert_eq!(json["config"]["base_seed"], 7);
    assert!(dir.path().join("out/timing.json").exists());
}

#[test]
fn run_cap_hits_exit_with_three() {
    let dir = setup();
    std::fs::write(
        dir.path().join("config.json"),
        r#"{"model": "tabular", "skeleton": {"file": "crowd.json"}, "phis": [10.0], "epsilons": [0.1],
            "pivots": ["first_improvement"], "trials": 5, "base_seed": 1, "max_iterations": 1,
            "family": "uniform_window"}"#,
    )
    .unwrap();
    let out = brdlab(
        &["run", "--config", "config.json", "--out", "out"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("iteration cap"));
    assert!(dir.path().join("out/report.csv").exists());
}

#[test]
fn threads_fall_back_to_environment() {
    let dir = setup();
    std::fs::write(
        dir.path().join("config.json"),
        r#"{"model": "tabular", "skeleton": {"generate": {"n": 3, "m": 3}}, "phis": [2.0], "epsilons": [0.5],
            "pivots": ["random_improving"], "trials": 20, "base_seed": 5, "start": "random_uniform"}"#,
    )
    .unwrap();
    let env = Command::new(env!("CARGO_BIN_EXE_brdlab"))
        .args(["run", "--config", "config.json", "--out", "a"])
        .env("BRDLAB_THREADS", "3")
        .current_dir(dir.path())
        .status()
        .unwrap();
    assert!(env.success());
    assert_eq!(
        brdlab(
            &[
                "run",
                "--config",
                "config.json",
                "--out",
                "b",
                "--threads",
                "1"
            ],
            dir.path()
        )
        .status
        .code(),
        Some(0)
    );
    let read = |d: &str| std::fs::read(dir.path().join(d).join("report.json")).unwrap();
    assert_eq!(read("a"), read("b"));
}

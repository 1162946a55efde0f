use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mems-pullin"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn pullin_reports_known_values() {
    for (alpha, expected) in [("0", 0.10871), ("1", 2.38709)] {
        let o = run(&["pullin", "--alpha", alpha]);
        assert!(o.status.success());
        let text = stdout(&o);
        assert_eq!(text.lines().next(), Some("alpha,s_star,lambda_star,p_residual,iterations"));
        let rows = csv_rows(&text);
        assert!((rows[0][2] - expected).abs() < 1e-4);
    }
}

#[test]
fn pullin_sweep_as_json() {
    let o = run(&["pullin", "--alpha-list", "0,1,2", "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 3);
    assert!((arr[1]["lambda_star"].as_f64().unwrap() - 2.38709).abs() < 1e-4);
    assert!(arr[0]["s_star"].as_f64().unwrap() > 1.0);
}

#[test]
fn invalid_flags_exit_with_usage() {
    for args in [
        vec!["pullin", "--alpha", "-1"],
        vec!["solve", "--lambda", "0"],
        vec!["solve"],
        vec!["simulate", "--lambda", "0.1", "--nx", "400"],
        vec!["diagram", "--t-min", "0.9", "--t-max", "0.5"],
        vec!["diagram", "--n", "1"],
        vec!["diagram", "--alpha-list", "0,1"],
        vec!["frobnicate"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("error"), "{args:?}");
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn diagram_minimal_and_deterministic() {
    let o = run(&["diagram", "--n", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert_eq!(text.lines().next(), Some("t,s,a,b,sigma,lambda"));

    let dir = tempfile::tempdir().unwrap();
    let (p1, p2) = (dir.path().join("one.csv"), dir.path().join("two.csv"));
    for (p, extra) in [(&p1, "--sequential"), (&p2, "--n=1000")] {
        let st = bin()
            .args(["diagram", "--alpha", "0", extra, "--out"])
            .arg(p)
            .status()
            .unwrap();
        assert!(st.success());
    }
    let (a, b) = (std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
    assert_eq!(a, b);
    let rows = csv_rows(std::str::from_utf8(&a).unwrap());
    assert!(rows.windows(2).all(|w| w[1][2] > w[0][2]));
    assert!(rows.windows(2).any(|w| w[1][3] > w[0][3]) && rows.windows(2).any(|w| w[1][3] < w[0][3]));
}

#[test]
fn diagram_alpha_list_writes_one_file_each() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin()
        .args(["diagram", "--alpha-list", "0,0.5", "--n", "10", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(st.success());
    for name in ["diagram_alpha_0.csv", "diagram_alpha_0.5.csv"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert_eq!(text.lines().count(), 11);
    }
}

#[test]
fn solve_below_and_above_fold() {
    let o = run(&["solve", "--lambda", "0.05", "--alpha", "0", "--n", "101"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["classification"], "two_solutions");
    let profiles = v["profiles"].as_array().unwrap();
    assert_eq!(profiles.len(), 2);
    let max_u = |p: &Value| {
        p["us"]
            .as_array()
            .unwrap()
            .iter()
            .map(|u| u.as_f64().unwrap())
            .fold(0.0, f64::max)
    };
    assert!(max_u(&profiles[0]) < max_u(&profiles[1]));
    assert_eq!(profiles[0]["xs"].as_array().unwrap().len(), 101);
    let roots = v["roots"].as_array().unwrap();
    assert!(roots[0]["s"].as_f64().unwrap() < roots[1]["s"].as_f64().unwrap());

    let o = run(&["solve", "--lambda", "0.2"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["classification"], "no_solution");
    assert!(v["roots"].as_array().unwrap().is_empty());
    assert!(v["profiles"].as_array().unwrap().is_empty());
}

fn simulate(dir: &Path, args: &[&str]) -> (Value, Vec<Vec<f64>>) {
    let (csv, json) = (dir.join("series.csv"), dir.join("summary.json"));
    let st = bin()
        .arg("simulate")
        .args(args)
        .arg("--out")
        .arg(&csv)
        .arg("--summary")
        .arg(&json)
        .status()
        .unwrap();
    assert!(st.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("t,max_u,u_mid,nonlocal_integral"));
    let summary = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    (summary, csv_rows(&text))
}

#[test]
fn simulate_statuses() {
    let dir = tempfile::tempdir().unwrap();
    let (s, rows) = simulate(dir.path(), &["--lambda", "0.2", "--nx", "101"]);
    assert_eq!(s["status"], "quenched");
    assert!(s["quench_time"].as_f64().unwrap() > 0.0);
    assert!(s.get("steady_gap").is_none());
    assert!(rows.last().unwrap()[1] >= 0.99);

    let (s, _) = simulate(dir.path(), &["--lambda", "0.05", "--nx", "101"]);
    assert_eq!(s["status"], "converged");
    assert!(s["steady_gap"].as_f64().unwrap() < 1e-3);

    let (s, rows) = simulate(dir.path(), &["--lambda", "0.05", "--t-end", "0.001"]);
    assert_eq!(s["status"], "timed_out");
    assert_eq!(rows.len(), 2);
}

#[test]
fn simulate_summary_goes_to_stdout_with_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let o = bin()
        .args(["simulate", "--lambda", "0.05", "--t-end", "0.01", "--nx", "51", "--out"])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"], "timed_out");
}

#[test]
fn verify_passes_and_detects_fault() {
    let o = run(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));

    let o = run(&["verify", "--inject-fault", "1e-3"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.contains("oracle equivalence")).unwrap();
    assert!(line.starts_with("FAIL"));

    let o = run(&["verify", "--json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 10);
}

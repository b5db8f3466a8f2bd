use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dfplay::harness::{load_summary, load_trajectory, BatchSummary, TRAJECTORY_COLUMNS};

fn dfplay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfplay")).args(args).output().expect("spawn dfplay")
}

fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name).display().to_string()
}

fn write_variant(dir: &Path, name: &str, edit: impl FnOnce(&mut serde_json::Value)) -> String {
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(scenario(name)).unwrap()).unwrap();
    edit(&mut v);
    let path = dir.join(format!("edited-{name}"));
    fs::write(&path, v.to_string()).unwrap();
    path.display().to_string()
}

fn s(p: &Path) -> String {
    p.display().to_string()
}

#[test]
fn run_writes_exact_csv_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = dfplay(&["run", "--scenario", &scenario("cover_star.json"), "--seed", "3", "--out", &s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), TRAJECTORY_COLUMNS.join(","));
    let positions = fs::read_to_string(out.join("positions.csv")).unwrap();
    assert!(positions.starts_with("round,agent,x,y\n0,1,"));
    assert!(out.join("summary.json").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let read = |k: usize| {
        let out = dir.path().join(format!("r{k}"));
        let o = dfplay(&["run", "--scenario", &scenario("beauty_geometric.json"), "--horizon", "60", "--out", &s(&out)]);
        assert!(o.status.success());
        ["trajectory.csv", "positions.csv", "summary.json"].map(|f| fs::read(out.join(f)).unwrap())
    };
    assert_eq!(read(0), read(1));
}

#[test]
fn positions_absent_without_motion() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_variant(dir.path(), "beauty_geometric.json", |v| {
        v["game"].as_object_mut().unwrap().remove("displacement");
    });
    let out = dir.path().join("run");
    let o = dfplay(&["run", "--scenario", &path, "--horizon", "20", "--out", &s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("trajectory.csv").exists());
    assert!(!out.join("positions.csv").exists());
}

#[test]
fn json_trajectory_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = dfplay(&["run", "--scenario", &scenario("cover_star.json"), "--format", "json", "--out", &s(&out)]);
    assert!(o.status.success());
    let path = out.join("trajectory.json");
    let file = load_trajectory(&path).unwrap();
    assert_eq!(file.beta_t.as_ref().unwrap().len(), file.trajectory.len());
    let again = serde_json::to_string_pretty(&file).unwrap() + "\n";
    assert_eq!(again, fs::read_to_string(&path).unwrap());
}

#[test]
fn batch_summary_reaggregates() {
    let dir = tempfile::tempdir().unwrap();
    let o = dfplay(&[
        "batch",
        "--scenario",
        &scenario("cover_star.json"),
        "--seeds",
        "0..6",
        "--parallel",
        "3",
        "--out",
        &s(dir.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = load_summary(&dir.path().join("summary.json")).unwrap();
    let seeds: Vec<u64> = summary.runs.iter().map(|r| r.seed).collect();
    assert_eq!(seeds, (0..6).collect::<Vec<_>>());
    let again = BatchSummary::from_rows(summary.horizon, summary.runs.clone());
    let close = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => (a - b).abs() <= 1e-12,
        (None, None) => true,
        _ => false,
    };
    assert_eq!(again.converged, summary.converged);
    assert!(close(again.mean_convergence, summary.mean_convergence));
    assert!(close(again.mean_objective, summary.mean_objective));
    assert!(close(again.fraction_reaching_baseline, summary.fraction_reaching_baseline));
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_variant(dir.path(), "beauty_geometric.json", |v| v["game"]["lambda"] = 1.5.into());
    let o = dfplay(&["run", "--scenario", &bad, "--out", &s(&dir.path().join("x"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("game.lambda"));

    let o = dfplay(&["batch", "--scenario", &scenario("cover_star.json"), "--seeds", "4..4"]);
    assert_eq!(o.status.code(), Some(1));
    let o = dfplay(&["run", "--scenario", &s(&PathBuf::from("/nonexistent/scenario.json"))]);
    assert_eq!(o.status.code(), Some(2));
    let o = dfplay(&["run"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_reports_cover_cycle_failure() {
    let o = dfplay(&["verify", "--samples", "2000"]);
    assert_eq!(o.status.code(), Some(3));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("PASS beauty contest: potential-cycle"));
    assert!(stdout.contains("FAIL target covering: potential-cycle"));
}

#[test]
fn verify_passes_common_start_cover() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_variant(dir.path(), "cover_star.json", |v| {
        v["game"]["robots"] = serde_json::json!([[0, 0], [0, 0], [0, 0], [0, 0], [0, 0]]);
    });
    let o = dfplay(&["verify", "--scenario", &path, "--samples", "2000"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn baseline_prints_assignment() {
    let o = dfplay(&["baseline", "--scenario", &scenario("cover_star.json"), "--seed", "2"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["assignment"].as_array().unwrap().len(), 5);
}

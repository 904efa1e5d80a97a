use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

fn ccnode(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ccnode"));
    cmd.args(args).env_remove("CCNODE_THREADS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("ccnode runs")
}

fn run_file(config: &Path, extra: &[&str]) -> (Output, TempDir) {
    let out = TempDir::new().unwrap();
    let mut args = vec!["run", config.to_str().unwrap(), "--out", out.path().to_str().unwrap()];
    args.extend_from_slice(extra);
    (ccnode(&args, &[]), out)
}

fn run_json(json: &str, extra: &[&str]) -> (Output, TempDir) {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("config.json");
    std::fs::write(&path, json).unwrap();
    let (output, out) = run_file(&path, extra);
    drop(dir);
    (output, out)
}

fn summary(dir: &TempDir) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap()
}

fn csv_rows(dir: &TempDir) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn router_example_reaches_other_cavity() {
    let (o, dir) = run_file(&examples().join("router_run.json"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = summary(&dir);
    assert!(s["final_populations"]["F_r"].as_f64().unwrap() >= 0.98);
    let speed = &s["physical_speed_m_per_s"];
    assert!(speed["linewidth_as_rate"].as_f64().unwrap() > 0.0 && speed["linewidth_as_angular"].as_f64().unwrap() > 0.0);
}

#[test]
fn empty_protocol_keeps_initial_state() {
    let (o, dir) = run_file(&examples().join("empty_protocol.json"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = csv_rows(&dir);
    assert_eq!(header, ["time", "F_l", "F_r", "F_m", "e_l", "e_r", "norm"]);
    for r in rows {
        assert_eq!(&r[1..], &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    }
}

#[test]
fn one_qubit_flip_example_reaches_target() {
    let (o, dir) = run_file(&examples().join("one_qubit_flip.json"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = summary(&dir);
    assert!(s["fidelities"]["F_l at node 1"].as_f64().unwrap() >= 0.99);
    let (header, _) = csv_rows(&dir);
    assert_eq!(header.len(), 22);
}

#[test]
fn sample_count_sets_csv_length() {
    let (o, dir) = run_file(&examples().join("router_run.json"), &["--samples", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.ends_with('\n'));
}

#[test]
fn norm_column_matches_population_sum() {
    let (o, dir) = run_file(&examples().join("lossy_linewidth.json"), &["--samples", "50"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, rows) = csv_rows(&dir);
    for r in rows {
        let n = r.len();
        let total: f64 = r[1..n - 1].iter().sum();
        assert!((total - r[n - 1]).abs() < 1e-9, "{total} vs {}", r[n - 1]);
    }
    let s = summary(&dir);
    assert!((s["decay_fit"]["rate"].as_f64().unwrap() - 0.3054).abs() < 0.25 * 0.3054);
}

#[test]
fn fixed_step_output_is_byte_identical() {
    let cfg = examples().join("router_run.json");
    let (a, da) = run_file(&cfg, &["--fixed-dt", "0.02", "--samples", "200"]);
    let (b, db) = run_file(&cfg, &["--fixed-dt", "0.02", "--samples", "200"]);
    assert!(a.status.success() && b.status.success());
    let read = |d: &TempDir| std::fs::read(d.path().join("trajectory.csv")).unwrap();
    assert_eq!(read(&da), read(&db));
}

#[test]
fn unknown_key_is_a_config_error() {
    let (o, _) = run_json(r#"{"schema": "ccnode/1", "mode": "stationary", "stationray": {}}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("stationray"), "{}", stderr(&o));
}

#[test]
fn nested_unknown_key_is_a_config_error() {
    let (o, _) = run_json(r#"{"schema": "ccnode/1", "mode": "stationary", "stationary": {"durration": 5}}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("durration"));
}

#[test]
fn wrong_schema_version_is_rejected() {
    let (o, _) = run_json(r#"{"schema": "ccnode/0", "mode": "stationary"}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("schema"));
}

#[test]
fn missing_section_names_the_key() {
    let (o, _) = run_json(r#"{"schema": "ccnode/1", "mode": "two-node", "initial_state": 3}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`network`"), "{}", stderr(&o));
}

#[test]
fn unknown_state_label_is_a_config_error() {
    let (o, _) = run_json(r#"{"schema": "ccnode/1", "mode": "single-run", "splitter": {}, "nu": 10, "initial_state": "G_l"}"#, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("initial_state"));
}

#[test]
fn unreachable_calibration_exits_with_bracket_failure() {
    let cfg = r#"{"schema": "ccnode/1", "mode": "calibrate", "splitter": {},
                  "calibrate": {"target": "balanced", "range": [200, 400]}}"#;
    let (o, _) = run_json(cfg, &[]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn unstable_fixed_step_is_a_numerical_failure() {
    let (o, _) = run_file(&examples().join("router_run.json"), &["--fixed-dt", "0.5"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn thread_cap_is_honoured_and_validated() {
    let cfg = examples().join("velocity_sweep.json");
    let dir = TempDir::new().unwrap();
    let cfg_small = dir.path().join("sweep.json");
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(cfg).unwrap()).unwrap();
    v["sweep"]["points"] = 4.into();
    v["sweep"]["range"] = serde_json::json!([10, 20]);
    std::fs::write(&cfg_small, v.to_string()).unwrap();
    let out = dir.path().join("out");
    let args = ["run", cfg_small.to_str().unwrap(), "--out", out.to_str().unwrap()];
    let o = ccnode(&args, &[("CCNODE_THREADS", "1")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sweep = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 5);
    let bad = ccnode(&args, &[("CCNODE_THREADS", "zero")]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn every_example_parses() {
    for entry in std::fs::read_dir(examples()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(v["schema"], "ccnode/1", "{}", path.display());
        assert!(v["description"].is_string(), "{}", path.display());
    }
}

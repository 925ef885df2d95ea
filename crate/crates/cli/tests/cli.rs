use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use vqclab_core::qrl::{AgentCheckpoint, METRICS_HEADER};
use vqclab_core::quanv::QuanvOutput;

fn vqclab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vqclab")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{}: {e}", dir.join(name).display()))
}

const MAP_4X4: &str = "0,0.1,0.2,0.3\n0.4,0.5,0.6,0.7\n0.8,0.9,1.0,0.5\n0.2,0.3,0.4,0.6\n";

#[test]
fn grad_check_passes_with_default_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = vqclab(tmp.path(), &["grad-check", "--seed", "1", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_slice(&read(&tmp.path().join("o"), "grad_check.json")).unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["max_abs_deviation"].as_f64().unwrap() <= 1e-5);
    assert_eq!(report["models"], 100);
}

#[test]
fn broken_shift_fails_the_gradient_check() {
    let tmp = tempfile::tempdir().unwrap();
    let out = vqclab(tmp.path(), &["grad-check", "--seed", "1", "--out", "o", "--param-shift", "1.0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("mismatch"), "{}", stderr(&out));
}

#[test]
fn oversized_grad_check_is_a_resource_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = vqclab(tmp.path(), &["grad-check", "--seed", "1", "--out", "o", "--qubits", "24"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("resource"), "{}", stderr(&out));
}

#[test]
fn training_twice_with_one_seed_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    for dir in ["a", "b"] {
        let out = vqclab(tmp.path(), &["train-qrl", "--seed", "7", "--episodes", "12", "--out", dir]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for name in ["metrics.csv", "checkpoint.json", "summary.json", "run.json"] {
        assert_eq!(read(&a, name), read(&b, name), "{name} differs");
    }
    let csv = String::from_utf8(read(&a, "metrics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(METRICS_HEADER));
    assert_eq!(lines.count(), 12);
    let checkpoint = AgentCheckpoint::from_json(&String::from_utf8(read(&a, "checkpoint.json")).unwrap()).unwrap();
    assert_eq!(checkpoint.seed, 7);
    checkpoint.into_agent().unwrap();
}

#[test]
fn different_seeds_give_different_runs() {
    let tmp = tempfile::tempdir().unwrap();
    for (dir, seed) in [("a", "1"), ("b", "2")] {
        let out =
            vqclab(tmp.path(), &["train-qrl", "--env", "cartpole", "--seed", seed, "--episodes", "5", "--out", dir]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    assert_ne!(read(&tmp.path().join("a"), "metrics.csv"), read(&tmp.path().join("b"), "metrics.csv"));
}

#[test]
fn flags_override_config_values() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("cfg.json"),
        r#"{"schema": "vqclab-config-v1", "seed": 3, "out": "from-config", "train_qrl": {"episodes": 3, "depth": 1}}"#,
    )
    .unwrap();
    let out = vqclab(tmp.path(), &["train-qrl", "--config", "cfg.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = String::from_utf8(read(&tmp.path().join("from-config"), "metrics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3);

    let out =
        vqclab(tmp.path(), &["train-qrl", "--config", "cfg.json", "--episodes", "5", "--seed", "4", "--out", "flags"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let dir = tmp.path().join("flags");
    assert_eq!(String::from_utf8(read(&dir, "metrics.csv")).unwrap().lines().count(), 1 + 5);
    let run: serde_json::Value = serde_json::from_slice(&read(&dir, "run.json")).unwrap();
    assert_eq!(run["seed"], 4);
    assert_eq!(run["config"]["train_qrl"]["depth"], 1);
}

#[test]
fn config_errors_exit_with_validation_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"schema": "vqclab-config-v1", "train_qrl": {"env": "mountaincar"}}"#, "env"),
        (r#"{"schema": "vqclab-config-v1", "extra": true}"#, "extra"),
        (r#"{"schema": "vqclab-config-v9"}"#, "vqclab-config-v9"),
        (r#"{"schema": "vqclab-config-v1", "train_qrl": {"gamma": 1.5}}"#, "gamma"),
        ("{not json", "config"),
    ];
    for (i, (text, needle)) in cases.iter().enumerate() {
        let path = tmp.path().join(format!("bad{i}.json"));
        fs::write(&path, text).unwrap();
        let out = vqclab(tmp.path(), &["train-qrl", "--config", path.to_str().unwrap(), "--seed", "1", "--out", "o"]);
        assert_eq!(out.status.code(), Some(1), "case {i}: {}", stderr(&out));
        assert!(stderr(&out).contains(needle), "case {i}: {}", stderr(&out));
    }
    let out = vqclab(tmp.path(), &["train-qrl", "--env", "pong", "--seed", "1", "--out", "o"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("env"));
}

#[test]
fn bad_flags_exit_with_validation_code() {
    let tmp = tempfile::tempdir().unwrap();
    let out = vqclab(tmp.path(), &["train-qrl", "--shots", "10", "--analytic"]);
    assert_eq!(out.status.code(), Some(1));
    let out = vqclab(tmp.path(), &["train-qrl", "--episodes", "many"]);
    assert_eq!(out.status.code(), Some(1));
    let out = vqclab(tmp.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    let out = vqclab(tmp.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn quanv_writes_the_expected_shape() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("map.csv"), MAP_4X4).unwrap();
    for dir in ["a", "b"] {
        let out = vqclab(tmp.path(), &["quanv", "--input", "map.csv", "--seed", "5", "--out", dir]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert!(stdout(&out).contains("2x2x4"), "{}", stdout(&out));
    }
    let a = read(&tmp.path().join("a"), "quanv.json");
    assert_eq!(a, read(&tmp.path().join("b"), "quanv.json"));
    let parsed = QuanvOutput::from_json(std::str::from_utf8(&a).unwrap()).unwrap();
    assert_eq!(parsed.shape(), [2, 2, 4]);
}

#[test]
fn quanv_with_shots_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("map.csv"), MAP_4X4).unwrap();
    for dir in ["a", "b"] {
        let out = vqclab(tmp.path(), &["quanv", "--input", "map.csv", "--seed", "5", "--shots", "64", "--out", dir]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    assert_eq!(read(&tmp.path().join("a"), "quanv.json"), read(&tmp.path().join("b"), "quanv.json"));
}

#[test]
fn quanv_rejects_ragged_csv_and_non_square_width() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("ragged.csv"), "0,1,2\n3,4\n").unwrap();
    let out = vqclab(tmp.path(), &["quanv", "--input", "ragged.csv", "--seed", "1", "--out", "o"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("row 2"), "{}", stderr(&out));

    fs::write(tmp.path().join("map.csv"), MAP_4X4).unwrap();
    let out = vqclab(tmp.path(), &["quanv", "--input", "map.csv", "--qubits", "3", "--seed", "1", "--out", "o"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn generated_seed_is_recorded_and_replays() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("map.csv"), MAP_4X4).unwrap();
    let out = vqclab(tmp.path(), &["quanv", "--input", "map.csv", "--out", "first"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("generated"));
    let run: serde_json::Value = serde_json::from_slice(&read(&tmp.path().join("first"), "run.json")).unwrap();
    let seed = run["seed"].as_u64().unwrap();
    assert_eq!(run["config"]["seed"].as_u64(), Some(seed));

    fs::write(tmp.path().join("replay.json"), serde_json::to_string(&run["config"]).unwrap()).unwrap();
    let out = vqclab(tmp.path(), &["quanv", "--input", "map.csv", "--config", "replay.json", "--out", "second"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(read(&tmp.path().join("first"), "quanv.json"), read(&tmp.path().join("second"), "quanv.json"));
}

#[test]
fn writes_stay_inside_the_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("map.csv"), MAP_4X4).unwrap();
    for args in [
        vec!["quanv", "--input", "map.csv", "--seed", "1", "--out", "out"],
        vec!["grad-check", "--seed", "1", "--out", "out"],
        vec!["train-qrl", "--seed", "1", "--episodes", "2", "--out", "out"],
    ] {
        assert_eq!(vqclab(tmp.path(), &args).status.code(), Some(0));
    }
    let mut top: Vec<String> =
        fs::read_dir(tmp.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    top.sort();
    assert_eq!(top, ["map.csv", "out"]);
    let mut inside: Vec<String> =
        fs::read_dir(tmp.path().join("out")).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    inside.sort();
    assert_eq!(inside, ["checkpoint.json", "grad_check.json", "metrics.csv", "quanv.json", "run.json", "summary.json"]);
}

#[test]
fn wall_clock_column_is_zero_by_default() {
    let tmp = tempfile::tempdir().unwrap();
    let out = vqclab(tmp.path(), &["train-qrl", "--seed", "2", "--episodes", "3", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(read(&tmp.path().join("o"), "metrics.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",0")));
}

use gyrosym::scenario::builtin;
use std::path::Path;
use std::process::{Command, Output};

fn gyrosym(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gyrosym"))
        .current_dir(dir)
        .env_remove("GYROSYM_SCENARIO_DIR")
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn principal_axis_spin_keeps_omega_constant() {
    let dir = tempfile::tempdir().unwrap();
    let o = gyrosym(dir.path(), &["simulate", "principal-axis-spin", "--out", "spin.csv"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("spin.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,w1,w2,w3,a1,a2,a3,H,G,orth_err");
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[1] - 1.0).abs() <= 1e-12 && v[2].abs() <= 1e-12 && v[3].abs() <= 1e-12);
    }
}

#[test]
fn rotational_kappa_omits_g_and_says_why() {
    let dir = tempfile::tempdir().unwrap();
    let o = gyrosym(dir.path(), &["simulate", "rotational-kappa", "--out", "r.csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("area integral does not exist"));
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,w1,w2,w3,a1,a2,a3,H,orth_err");
}

#[test]
fn batch_mode_writes_one_file_per_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let o = gyrosym(
        dir.path(),
        &["simulate", "free-body", "spherical-free-body", "gyrostat", "--out-dir", ".", "--jobs", "3", "--t-end", "1"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["free-body", "spherical-free-body", "gyrostat"] {
        assert!(dir.path().join(format!("{name}.csv")).is_file());
    }
    let o = gyrosym(dir.path(), &["simulate", "gyrostat", "gyrostat", "--out-dir", "."]);
    assert_eq!(o.status.code(), Some(1));
    let o = gyrosym(dir.path(), &["simulate", "gyrostat", "free-body", "--out", "x.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn scenario_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = builtin("gyrostat").unwrap();
    spec.name = "my-top".into();
    spec.integrator.t_end = 1.0;
    std::fs::write(dir.path().join("my-top.toml"), spec.to_toml()).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_gyrosym"))
        .current_dir(dir.path())
        .env("GYROSYM_SCENARIO_DIR", dir.path())
        .args(["list-scenarios"])
        .output()
        .unwrap();
    assert!(stdout(&o).contains("my-top"));
    let o = Command::new(env!("CARGO_BIN_EXE_gyrosym"))
        .current_dir(dir.path())
        .env("GYROSYM_SCENARIO_DIR", dir.path())
        .args(["simulate", "my-top", "--out", "m.csv"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn parse_errors_exit_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "name = \"bad\"\ninertia = [1.0, 1.0, 1.0]\npotential = \"a1 +\"\n[initial]\nalpha = [0.0, 0.0, 1.0]\nomega = [0.0, 0.0, 0.0]\n").unwrap();
    let o = gyrosym(dir.path(), &["check", "bad.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    std::fs::write(dir.path().join("q.toml"), "name = \"q\"\ninertia = [1.0, 1.0, 1.0]\npotential = \"g1\"\n[initial]\nalpha = [0.0, 0.0, 1.0]\nomega = [0.0, 0.0, 0.0]\n").unwrap();
    let o = gyrosym(dir.path(), &["lemma1", "q.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn lemma1_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = gyrosym(dir.path(), &["lemma1", "gyrostat", "--t-end", "5", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["order"].as_f64().unwrap() >= 1.9);
    assert_eq!(v["passed"], true);
}

#[test]
fn method_override_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let a = gyrosym(dir.path(), &["simulate", "spherical-free-body", "--out", "a.csv", "--t-end", "1"]);
    let b = gyrosym(
        dir.path(),
        &["simulate", "spherical-free-body", "--out", "b.csv", "--t-end", "1", "--method", "rk4-projected"],
    );
    assert_eq!((a.status.code(), b.status.code()), (Some(0), Some(0)));
    assert!(stdout(&b).contains("rk4-projected"));
    let bad = gyrosym(dir.path(), &["simulate", "gyrostat", "--method", "euler"]);
    assert_eq!(bad.status.code(), Some(2));
}

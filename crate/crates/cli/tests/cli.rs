use std::fs;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_husimi-flow"))
}

fn small_config(dir: &Path) -> std::path::PathBuf {
    let text = r#"{
  "name": "small-well",
  "hamiltonian": {"terms": [{"x_power": 0, "p_power": 2, "coeff": 1.0},
                            {"x_power": 4, "p_power": 0, "coeff": 0.3333333333333333},
                            {"x_power": 2, "p_power": 0, "coeff": -2.0},
                            {"x_power": 0, "p_power": 0, "coeff": 0.25}],
                  "mass": 0.5, "omega": 2.0, "hbar": 1.0},
  "initial_z": [-0.866, 0.9228],
  "position_grid": {"x_min": -16.0, "x_max": 16.0, "n": 256},
  "phase_grid": {"x_min": -10.0, "x_max": 10.0, "nx": 128, "p_min": -28.0, "p_max": 28.0, "np": 256},
  "dt": 0.001,
  "record_times": [0.5],
  "out_dir": "unused",
  "orders": ["0", "exact"],
  "topology": {"q_floor": 1e-8, "envelope_radius": 3, "boundary_band": 3, "pairing_radius": 5.0,
               "classification_tol": 1e-6, "newton_max_iter": 50, "search_box": [-4.0, 4.0, -4.0, 4.0]},
  "inversion_threshold": 0.001,
  "residual_dt": 0.001
}"#;
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn unknown_flag_prints_usage_and_exits_2() {
    let out = bin().args(["flow", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(bin().output().unwrap().status.code(), Some(2));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn invalid_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"name": 3}"#).unwrap();
    let out = bin().args(["husimi", "--config", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["flow", "--order", "half", "--config", "default"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn uncontained_state_is_a_numerical_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_config(dir.path());
    let text = fs::read_to_string(&path).unwrap().replace("[-0.866, 0.9228]", "[9.0, 0.0]");
    fs::write(&path, text).unwrap();
    let out = bin().args(["propagate", "--config", path.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn flow_writes_one_csv_with_the_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_config(dir.path());
    let out_root = dir.path().join("out");
    let out = bin()
        .args(["flow", "--order", "1", "--time", "0.5", "--config", path.to_str().unwrap(), "--out", out_root.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let slice = out_root.join("small-well").join("0.5");
    let csv = fs::read_to_string(slice.join("current_1.csv")).unwrap();
    assert!(csv.starts_with("x,p,Q,Jx,Jp,order,t\n"));
    assert_eq!(csv.lines().count(), 128 * 256 + 1);
    let echo: serde_json::Value = serde_json::from_str(&fs::read_to_string(slice.join("config.json")).unwrap()).unwrap();
    assert_eq!(echo["record_times"][0], 0.5);
}

#[test]
fn experiment_runs_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_config(dir.path());
    let mut trees = Vec::new();
    for k in 0..2 {
        let root = dir.path().join(format!("run{k}"));
        let out = bin()
            .args(["experiment", "double-well", "--config", path.to_str().unwrap(), "--out", root.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        trees.push(root.join("small-well"));
    }
    let slice = |k: usize| trees[k].join("0.5");
    for file in ["husimi.csv", "current_0.csv", "current_exact.csv", "psi.csv", "topology.csv", "inversion.csv", "residual.json"] {
        let a = fs::read(slice(0).join(file)).unwrap();
        assert!(!a.is_empty(), "{file}");
        assert_eq!(a, fs::read(slice(1).join(file)).unwrap(), "{file}");
    }
    assert!(trees[0].join("summary.json").exists());
}

#[test]
fn verify_passes_and_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["verify", "--out", dir.path().to_str().unwrap()]).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.lines().all(|l| l.starts_with("PASS")));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert!(report.as_array().unwrap().len() >= 10);
}

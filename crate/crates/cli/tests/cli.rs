use std::process::Command;

use tempfile::tempdir;

fn adder() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adder"))
}

fn write_config(dir: &std::path::Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, body).unwrap();
    p
}

const QUICK: &str = r#"
base = "fig4a"
id = "quick"
k = [10.0]
theta_steps = 4
truncation = 5
hamiltonian = "effective"
unit_convention = "angular"
noiseless = true
"#;

#[test]
fn list_names_every_scenario() {
    let out = adder().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ["fig4a", "fig5b", "fig7b", "fig9b"] {
        assert!(text.contains(id), "{id} missing");
    }
}

#[test]
fn config_run_writes_csv() {
    let dir = tempdir().unwrap();
    let cfg = write_config(dir.path(), QUICK);
    let out_path = dir.path().join("out.csv");
    let status = adder()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("# code_version = "));
    assert!(text.contains("# unit_convention = angular"));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with("scenario,theta,k,g_ab_over_g,c,fidelity,p_plus,p_minus,p_ref,trace_deficit,min_eig"));
    let rows: Vec<_> = text.lines().filter(|l| l.starts_with("quick,")).collect();
    assert_eq!(rows.len(), 4);
}

#[test]
fn json_output_and_flag_overrides() {
    let dir = tempdir().unwrap();
    let cfg = write_config(dir.path(), QUICK);
    let out = adder()
        .args(["run", "--format", "json", "--theta-steps", "3", "--threads", "1", "--seed", "7", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert_eq!(v["metadata"]["theta_steps"], 3);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempdir().unwrap();
    let cfg = write_config(dir.path(), "base = \"fig4a\"\nunknown_key = 3\n");
    let status = adder().args(["run", "--config"]).arg(&cfg).status().unwrap();
    assert_eq!(status.code(), Some(1));
    let status = adder().args(["run", "--scenario", "fig42"]).status().unwrap();
    assert_eq!(status.code(), Some(1));
    let status = adder().args(["run"]).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn failed_points_exit_two() {
    // unequal couplings are rejected by the effective Hamiltonian
    let dir = tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{QUICK}c = [1.02]\n"));
    let out = adder().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("symmetric couplings"));
}

#[test]
fn check_violation_exits_three() {
    // a parity-corrected noiseless run is exact, far above the k = 10 averages
    let dir = tempdir().unwrap();
    let cfg = write_config(dir.path(), QUICK);
    let status = adder()
        .args(["run", "--check", "--target", "parity-corrected", "--config"])
        .arg(&cfg)
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(3));
}

//! End-to-end runs of the command-line tool.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thermophase"))
}

#[test]
fn presets_lists_the_catalogue() {
    let out = bin().arg("presets").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().filter_map(|l| l.split_whitespace().next()).collect();
    assert_eq!(names, ["equilibrium", "spinodal-decomposition", "damage-loading", "thermal-pulse"]);
}

#[test]
fn simulate_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let mut c = thermophase::io::preset("equilibrium").unwrap();
    c.domain.cells = vec![4, 4];
    c.time.horizon = 5.0 * c.time.tau;
    std::fs::write(&cfg, c.to_toml()).unwrap();
    let out = dir.path().join("traj");
    let status = bin().args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    assert!(out.join("manifest.toml").exists());
    for window in ["steps", "all"] {
        let status = bin().args(["check", "--window", window, "--traj"]).arg(&out).status().unwrap();
        assert!(status.success(), "window {window}");
    }
}

#[test]
fn output_directory_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("env-out");
    let status = bin().args(["simulate", "--preset", "equilibrium"]).env("THERMOPHASE_OUT", &out).output().unwrap().status;
    assert!(status.success());
    assert!(out.join("manifest.toml").exists());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = bin().args(["presets", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn errors_are_reported_on_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[domain]\ndim = 1\nextents = [1.0]\ncells = [4]\n[time]\nhorizon = 1.0\ntau = 0.1\n[material.heat]\nkappa = 0.5\n").unwrap();
    let out = bin().args(["simulate", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: kind=config-invalid"), "{err}");
}

#[test]
fn check_refuses_a_missing_archive() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["check", "--traj"]).arg(dir.path()).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("kind=archive-mismatch"));
}

//! Configuration parsing, field dumps and trajectory archives.

use std::fs;
use std::path::Path;

use thermophase::grid::{Mesh, MeshSpec};
use thermophase::io::*;
use thermophase::stepper::{init_states, run};

const MINIMAL: &str = "
[domain]
dim = 1
extents = [1.0]
cells = [4]

[time]
horizon = 0.1
tau = 0.02
";

fn messages(text: &str) -> Vec<String> {
    match RunConfig::parse(text) {
        Err(thermophase::Error::ConfigInvalid(m)) => m,
        other => panic!("expected an invalid configuration, got {other:?}"),
    }
}

fn short_run(dir: &Path) -> RunConfig {
    let mut cfg = preset("equilibrium").unwrap();
    cfg.domain.cells = vec![3, 3];
    cfg.time.horizon = 3.0 * cfg.time.tau;
    let setup = cfg.setup().unwrap();
    let traj = run(&setup.problem, &setup.initial, setup.horizon).unwrap();
    write_archive(dir, &cfg, &setup.problem.mesh, &traj).unwrap();
    cfg
}

#[test]
fn minimal_configuration_takes_the_defaults() {
    let cfg = RunConfig::parse(MINIMAL).unwrap();
    assert_eq!(cfg.initial, InitialConfig::default());
    assert_eq!(cfg.output, OutputConfig::default());
    let setup = cfg.setup().unwrap();
    assert_eq!(setup.problem.mesh.n_nodes, 5);
    assert_eq!(setup.problem.params.p, 2.0);
}

#[test]
fn subquadratic_conductivity_growth_is_rejected() {
    let m = messages(&format!("{MINIMAL}\n[material.heat]\nkappa = 0.5\n"));
    assert_eq!(m.len(), 1);
    assert!(m[0].contains("kappa > 1"), "{m:?}");
}

#[test]
fn initial_damage_above_one_is_rejected() {
    let m = messages(&format!("{MINIMAL}\n[initial.z]\nkind = \"uniform\"\nvalue = 1.5\n"));
    assert!(m.iter().any(|s| s.contains("0 <= z0 <= 1")), "{m:?}");
}

#[test]
fn every_violation_is_reported_at_once() {
    let text = format!("{MINIMAL}\n[material.heat]\nkappa = 0.5\nc0 = -1.0\n[initial.theta]\nkind = \"uniform\"\nvalue = 0.0\n");
    let m = messages(&text);
    assert!(m.len() >= 3, "{m:?}");
    assert!(RunConfig::parse("[domain\n").is_err());
}

#[test]
fn csv_layout_of_a_three_node_field() {
    let mesh = Mesh::new(&MeshSpec { dim: 1, extents: vec![1.0], cells: vec![2] }).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    write_field_csv(&mesh, "c", &[0.0, 1.0, 2.0], 1, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text, "node,x,c\n0,0.0,0.0\n1,0.5,1.0\n2,1.0,2.0\n");
}

#[test]
fn empty_format_list_writes_nothing() {
    let setup = preset("equilibrium").unwrap().setup().unwrap();
    let state = init_states(&setup.problem, &setup.initial).unwrap().0;
    let dir = tempfile::tempdir().unwrap();
    let files = write_snapshot(&setup.problem.mesh, &state, dir.path(), &[]).unwrap();
    assert!(files.is_empty());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn csv_round_trip_is_exact() {
    let mesh = Mesh::new(&MeshSpec { dim: 2, extents: vec![1.0, 0.7], cells: vec![3, 5] }).unwrap();
    let values: Vec<f64> = (0..2 * mesh.n_nodes).map(|i| (i as f64 * 0.731).sin() / 3.0 + 1e-300 * i as f64).collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.csv");
    write_field_csv(&mesh, "u", &values, 2, &path).unwrap();
    assert_eq!(read_field_csv(&mesh, &path).unwrap(), values);
}

#[test]
fn vtk_header_is_structured_points() {
    let mesh = Mesh::new(&MeshSpec { dim: 2, extents: vec![1.0, 1.0], cells: vec![2, 2] }).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.vtk");
    write_vtk(&mesh, "z", &[1.0; 9], 1, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# vtk DataFile Version 3.0");
    assert_eq!(lines[3], "DATASET STRUCTURED_POINTS");
    assert_eq!(lines[4], "DIMENSIONS 3 3 1");
    assert_eq!(lines.len(), 10 + 9);
}

#[test]
fn archive_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_run(dir.path());
    let a = read_archive(dir.path()).unwrap();
    assert_eq!(a.config, cfg);
    assert_eq!(a.manifest.steps, 3);
    assert_eq!(a.manifest.config_hash, config_hash(&cfg));
    let setup = cfg.setup().unwrap();
    let traj = run(&setup.problem, &setup.initial, setup.horizon).unwrap();
    for (x, y) in a.trajectory.states.iter().zip(&traj.states) {
        assert_eq!((x.k, &x.c, &x.z, &x.theta, &x.u, &x.v), (y.k, &y.c, &y.z, &y.theta, &y.u, &y.v));
    }
}

#[test]
fn truncated_archive_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    short_run(dir.path());
    let file = dir.path().join("steps/00002/theta.csv");
    let text = fs::read_to_string(&file).unwrap();
    fs::write(&file, &text[..text.len() / 2]).unwrap();
    assert_eq!(read_archive(dir.path()).unwrap_err().kind(), "archive-mismatch");

    let dir = tempfile::tempdir().unwrap();
    short_run(dir.path());
    fs::remove_dir_all(dir.path().join("steps/00003")).unwrap();
    assert_eq!(read_archive(dir.path()).unwrap_err().kind(), "archive-mismatch");
}

#[test]
fn edited_configuration_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = short_run(dir.path());
    cfg.material.heat.rho = 0.25;
    fs::write(dir.path().join("config.toml"), cfg.to_toml()).unwrap();
    let err = read_archive(dir.path()).unwrap_err();
    assert_eq!(err.kind(), "archive-mismatch");
}

#[test]
fn environment_overrides_the_output_directory() {
    let configured = Path::new("configured");
    std::env::remove_var("THERMOPHASE_OUT");
    assert_eq!(output_dir(configured), configured);
    std::env::set_var("THERMOPHASE_OUT", "/tmp/elsewhere");
    assert_eq!(output_dir(configured), Path::new("/tmp/elsewhere"));
    std::env::remove_var("THERMOPHASE_OUT");
}

#[test]
fn every_preset_is_valid() {
    assert_eq!(PRESETS.len(), 4);
    for (name, _) in PRESETS {
        preset(name).unwrap().validate().unwrap();
    }
    assert!(preset("nonexistent").is_none());
}

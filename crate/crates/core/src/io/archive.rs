use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{Format, RunConfig};
use super::snapshot::{read_state, write_snapshot};
use super::write_atomic;
use crate::error::Error;
use crate::grid::{Mesh, MeshSpec};
use crate::stepper::{StepReport, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    /// SHA-256 of the canonical configuration text.
    pub config_hash: String,
    pub mesh: MeshSpec,
    pub tau: f64,
    pub steps: usize,
    /// SHA-256 over every stored field file, in level order.
    pub data_hash: String,
}

/// A stored run.
#[derive(Debug, Clone)]
pub struct Archive {
    pub config: RunConfig,
    pub manifest: Manifest,
    pub trajectory: Trajectory,
}

pub fn config_hash(cfg: &RunConfig) -> String {
    hex(&Sha256::digest(cfg.to_toml().as_bytes()))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

const FIELDS: [&str; 6] = ["c", "mu", "z", "theta", "u", "v"];

fn level_dir(dir: &Path, k: usize) -> std::path::PathBuf {
    dir.join("steps").join(format!("{k:05}"))
}

fn data_hash(dir: &Path, steps: usize) -> Result<String, Error> {
    let mut h = Sha256::new();
    for k in 0..=steps {
        for f in FIELDS {
            let path = level_dir(dir, k).join(format!("{f}.csv"));
            let bytes = std::fs::read(&path)
                .map_err(|e| Error::ArchiveMismatch(format!("missing {}: {e}", path.display())))?;
            h.update(&bytes);
        }
    }
    Ok(hex(&h.finalize()))
}

fn reports_csv(reports: &[StepReport]) -> String {
    let mut s = String::from(
        "k,t,sweeps,ch_iterations,ch_residual,damage_iterations,damage_residual,momentum_iterations,\
momentum_residual,temperature_iterations,temperature_residual,active_upper,active_lower,\
complementarity_gap,theta_min,theta_max,mass_defect,energy_residual,continuation_stages,substeps\n",
    );
    for r in reports {
        let _ = writeln!(
            s,
            "{},{:?},{},{},{:?},{},{:?},{},{:?},{},{:?},{},{},{:?},{:?},{:?},{:?},{:?},{},{}",
            r.k,
            r.t,
            r.sweeps,
            r.ch.iterations,
            r.ch.residual,
            r.damage.iterations,
            r.damage.residual,
            r.momentum.iterations,
            r.momentum.residual,
            r.temperature.iterations,
            r.temperature.residual,
            r.active_upper,
            r.active_lower,
            r.complementarity_gap,
            r.theta_min,
            r.theta_max,
            r.mass_defect,
            r.energy_residual,
            r.continuation_stages,
            r.substeps
        );
    }
    s
}

/// Store the configuration, every time level as CSV, the step reports and the manifest.
pub fn write_archive(dir: &Path, cfg: &RunConfig, mesh: &Mesh, traj: &Trajectory) -> Result<Manifest, Error> {
    std::fs::create_dir_all(dir)?;
    write_atomic(&dir.join("config.toml"), cfg.to_toml().as_bytes())?;
    for (k, s) in traj.states.iter().enumerate() {
        write_snapshot(mesh, s, &level_dir(dir, k), &[Format::Csv])?;
        let export: Vec<Format> = cfg.output.formats.iter().filter(|f| **f != Format::Csv).cloned().collect();
        let last = k + 1 == traj.states.len();
        if !export.is_empty() && (k % cfg.output.cadence == 0 || last) {
            write_snapshot(mesh, s, &dir.join("vtk").join(format!("{k:05}")), &export)?;
        }
    }
    write_atomic(&dir.join("reports.csv"), reports_csv(&traj.reports).as_bytes())?;
    let manifest = Manifest {
        config_hash: config_hash(cfg),
        mesh: cfg.domain.clone(),
        tau: traj.tau,
        steps: traj.steps(),
        data_hash: data_hash(dir, traj.steps())?,
    };
    let text = toml::to_string(&manifest).expect("manifest is always representable");
    write_atomic(&dir.join("manifest.toml"), text.as_bytes())?;
    Ok(manifest)
}

/// Load an archive, refusing it when the configuration or the stored fields do not match the manifest.
pub fn read_archive(dir: &Path) -> Result<Archive, Error> {
    let text = std::fs::read_to_string(dir.join("manifest.toml"))
        .map_err(|e| Error::ArchiveMismatch(format!("no manifest: {e}")))?;
    let manifest: Manifest = toml::from_str(&text).map_err(|e| Error::ArchiveMismatch(format!("manifest: {e}")))?;
    let cfg_text = std::fs::read_to_string(dir.join("config.toml"))?;
    let config = RunConfig::parse(&cfg_text)?;
    if config_hash(&config) != manifest.config_hash {
        return Err(Error::ArchiveMismatch("configuration hash differs from the manifest".into()));
    }
    if config.domain != manifest.mesh {
        return Err(Error::ArchiveMismatch("mesh differs from the manifest".into()));
    }
    let stored = std::fs::read_dir(dir.join("steps"))?.count();
    if stored != manifest.steps + 1 {
        return Err(Error::ArchiveMismatch(format!(
            "manifest lists {} steps but {} levels are stored",
            manifest.steps,
            stored.saturating_sub(1)
        )));
    }
    if data_hash(dir, manifest.steps)? != manifest.data_hash {
        return Err(Error::ArchiveMismatch("stored fields differ from the manifest hash".into()));
    }
    let mesh = Mesh::new(&manifest.mesh)?;
    let states = (0..=manifest.steps)
        .map(|k| read_state(&level_dir(dir, k), &mesh, k, k as f64 * manifest.tau))
        .collect::<Result<Vec<_>, _>>()?;
    let tau = manifest.tau;
    Ok(Archive { config, manifest, trajectory: Trajectory { tau, states, reports: Vec::new() } })
}

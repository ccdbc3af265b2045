//! Configuration, presets, snapshots and trajectory archives.

mod archive;
mod config;
mod presets;
mod snapshot;

pub use archive::{config_hash, read_archive, write_archive, Archive, Manifest};
pub use config::{Format, InitialConfig, OutputConfig, RunConfig, RunSetup, SolverConfig, TimeConfig};
pub use presets::{preset, PRESETS};
pub use snapshot::{read_field_csv, read_initial, write_field_csv, write_snapshot, write_vtk};

use std::path::Path;

/// Write `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

/// Output directory, overridden by `THERMOPHASE_OUT` when set.
pub fn output_dir(configured: &Path) -> std::path::PathBuf {
    match std::env::var_os("THERMOPHASE_OUT") {
        Some(v) if !v.is_empty() => v.into(),
        _ => configured.to_path_buf(),
    }
}

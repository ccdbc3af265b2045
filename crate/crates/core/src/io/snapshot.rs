use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::Format;
use super::write_atomic;
use crate::error::Error;
use crate::grid::Mesh;
use crate::stepper::{InitialFields, State};

const AXES: [&str; 3] = ["x", "y", "z"];

/// CSV with columns `node, coordinates..., values...`; values use the shortest exact decimal form.
pub fn write_field_csv(mesh: &Mesh, name: &str, values: &[f64], components: usize, path: &Path) -> Result<(), Error> {
    let d = mesh.dim;
    let mut s = String::from("node");
    for a in AXES.iter().take(d) {
        s.push(',');
        s.push_str(a);
    }
    if components == 1 {
        let _ = write!(s, ",{name}");
    } else {
        for a in AXES.iter().take(components) {
            let _ = write!(s, ",{name}_{a}");
        }
    }
    s.push('\n');
    for i in 0..mesh.n_nodes {
        let x = mesh.coords(i);
        let _ = write!(s, "{i}");
        for xk in x.iter().take(d) {
            let _ = write!(s, ",{xk:?}");
        }
        for k in 0..components {
            let _ = write!(s, ",{:?}", values[components * i + k]);
        }
        s.push('\n');
    }
    write_atomic(path, s.as_bytes())?;
    Ok(())
}

/// Values of a CSV written by [`write_field_csv`], interleaved by node.
pub fn read_field_csv(mesh: &Mesh, path: &Path) -> Result<Vec<f64>, Error> {
    let text = std::fs::read_to_string(path)?;
    let bad = |msg: String| Error::ArchiveMismatch(format!("{}: {msg}", path.display()));
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file".into()))?;
    let skip = 1 + mesh.dim;
    let cols = header.split(',').count();
    if cols <= skip {
        return Err(bad("no value columns".into()));
    }
    let mut out = Vec::with_capacity((cols - skip) * mesh.n_nodes);
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != cols || parts[0].parse::<usize>().ok() != Some(i) {
            return Err(bad(format!("malformed row {i}")));
        }
        for p in &parts[skip..] {
            out.push(p.parse::<f64>().map_err(|e| bad(format!("row {i}: {e}")))?);
        }
        rows += 1;
    }
    if rows != mesh.n_nodes {
        return Err(bad(format!("expected {} rows, found {rows}", mesh.n_nodes)));
    }
    Ok(out)
}

/// Legacy ASCII VTK file of one field on the structured grid.
pub fn write_vtk(mesh: &Mesh, name: &str, values: &[f64], components: usize, path: &Path) -> Result<(), Error> {
    let d = mesh.dim;
    let mut s = String::from("# vtk DataFile Version 3.0\n");
    let _ = writeln!(s, "{name}\nASCII\nDATASET STRUCTURED_POINTS");
    let n = mesh.nodes_per_axis;
    let _ = writeln!(s, "DIMENSIONS {} {} {}", n[0], n[1], n[2]);
    let _ = writeln!(s, "ORIGIN 0 0 0");
    let h: Vec<f64> = (0..3).map(|k| if k < d { mesh.h[k] } else { 1.0 }).collect();
    let _ = writeln!(s, "SPACING {:?} {:?} {:?}", h[0], h[1], h[2]);
    let _ = writeln!(s, "POINT_DATA {}", mesh.n_nodes);
    if components == 1 {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in values {
            let _ = writeln!(s, "{v:?}");
        }
    } else {
        let _ = writeln!(s, "VECTORS {name} double");
        for i in 0..mesh.n_nodes {
            let c: Vec<String> =
                (0..3).map(|k| if k < components { format!("{:?}", values[components * i + k]) } else { "0.0".into() }).collect();
            let _ = writeln!(s, "{}", c.join(" "));
        }
    }
    write_atomic(path, s.as_bytes())?;
    Ok(())
}

fn fields(state: &State) -> [(&'static str, &[f64], bool); 6] {
    [
        ("c", &state.c, false),
        ("mu", &state.mu, false),
        ("z", &state.z, false),
        ("theta", &state.theta, false),
        ("u", &state.u, true),
        ("v", &state.v, true),
    ]
}

/// Write every field of `state` into `dir` in each requested format. Returns the files written.
pub fn write_snapshot(mesh: &Mesh, state: &State, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>, Error> {
    let mut out = Vec::new();
    for f in formats {
        for (name, values, vector) in fields(state) {
            let comps = if vector { mesh.dim } else { 1 };
            let path = match f {
                Format::Csv => dir.join(format!("{name}.csv")),
                Format::Vtk => dir.join(format!("{name}.vtk")),
            };
            match f {
                Format::Csv => write_field_csv(mesh, name, values, comps, &path)?,
                Format::Vtk => write_vtk(mesh, name, values, comps, &path)?,
            }
            out.push(path);
        }
    }
    Ok(out)
}

/// Read a full state from a CSV snapshot directory.
pub(crate) fn read_state(dir: &Path, mesh: &Mesh, k: usize, t: f64) -> Result<State, Error> {
    let r = |n: &str| read_field_csv(mesh, &dir.join(format!("{n}.csv")));
    Ok(State { k, t, c: r("c")?, mu: r("mu")?, z: r("z")?, theta: r("theta")?, u: r("u")?, v: r("v")? })
}

/// Initial fields from a CSV snapshot directory (`mu` is not needed).
pub fn read_initial(dir: &Path, mesh: &Mesh) -> Result<InitialFields, Error> {
    let r = |n: &str| read_field_csv(mesh, &dir.join(format!("{n}.csv")));
    Ok(InitialFields { c: r("c")?, z: r("z")?, theta: r("theta")?, u: r("u")?, v: r("v")? })
}

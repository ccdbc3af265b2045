use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::grid::{Mesh, MeshSpec};
use crate::material::{MaterialModel, RegularizationParams};
use crate::stepper::{
    ContinuationSettings, DataSampler, InitialFields, Problem, SchemeParams, SolverSettings, SpaceProfile,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    /// Final time `T`.
    pub horizon: f64,
    pub tau: f64,
}

/// Initial fields, either as profiles or read from a snapshot directory written by [`super::write_snapshot`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    pub c: SpaceProfile,
    pub z: SpaceProfile,
    pub theta: SpaceProfile,
    /// One profile per displacement component; missing components are zero.
    pub u: Vec<SpaceProfile>,
    pub v: Vec<SpaceProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<PathBuf>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            c: SpaceProfile::uniform(0.0),
            z: SpaceProfile::uniform(1.0),
            theta: SpaceProfile::uniform(1.0),
            u: Vec::new(),
            v: Vec::new(),
            snapshot: None,
        }
    }
}

/// Numerical parameters of the scheme and its solvers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Gradient exponent; defaults to 2, 3, 4 in one, two and three dimensions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub eps_p: f64,
    pub allow_p_le_dim: bool,
    pub omega: f64,
    pub trunc_halfwidth: f64,
    pub sweep_tol: f64,
    pub newton_tol: f64,
    pub max_sweeps: usize,
    pub max_newton: usize,
    pub damping: f64,
    pub max_active_set: usize,
    pub max_substep_depth: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = SolverSettings::default();
        let r = RegularizationParams::default();
        SolverConfig {
            p: None,
            eps_p: 1e-8,
            allow_p_le_dim: false,
            omega: r.omega,
            trunc_halfwidth: r.trunc_halfwidth,
            sweep_tol: s.sweep_tol,
            newton_tol: s.newton_tol,
            max_sweeps: s.max_sweeps,
            max_newton: s.max_newton,
            damping: s.damping,
            max_active_set: s.max_active_set,
            max_substep_depth: s.max_substep_depth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Vtk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Write a snapshot every `cadence` steps (the last step is always written).
    pub cadence: usize,
    pub formats: Vec<Format>,
    pub monitors: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { directory: PathBuf::from("out"), cadence: 1, formats: vec![Format::Csv], monitors: true }
    }
}

/// Complete description of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: MeshSpec,
    pub time: TimeConfig,
    #[serde(default)]
    pub material: MaterialModel,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub data: DataSampler,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub continuation: ContinuationSettings,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A validated run: problem, initial fields and horizon.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub problem: Problem,
    pub initial: InitialFields,
    pub horizon: f64,
}

impl RunConfig {
    /// Parse and validate; every violated condition is reported at once.
    pub fn parse(text: &str) -> Result<RunConfig, Error> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::ConfigInvalid(vec![format!("syntax: {e}")]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    pub fn scheme_params(&self) -> SchemeParams {
        let s = &self.solver;
        SchemeParams {
            tau: self.time.tau,
            p: s.p.unwrap_or_else(|| SchemeParams::default_p(self.domain.dim)),
            eps_p: s.eps_p,
            allow_p_le_dim: s.allow_p_le_dim,
            regularization: RegularizationParams { omega: s.omega, trunc_halfwidth: s.trunc_halfwidth },
            solver: SolverSettings {
                sweep_tol: s.sweep_tol,
                newton_tol: s.newton_tol,
                max_sweeps: s.max_sweeps,
                max_newton: s.max_newton,
                damping: s.damping,
                max_active_set: s.max_active_set,
                max_substep_depth: s.max_substep_depth,
            },
            continuation: self.continuation.clone(),
        }
    }

    fn violations(&self) -> Vec<String> {
        let mut out = self.domain.validate();
        if !(self.time.horizon >= 0.0 && self.time.horizon.is_finite()) {
            out.push(format!("time.horizon: final time must be nonnegative (got {})", self.time.horizon));
        }
        let params = self.scheme_params();
        out.extend(params.validate(self.domain.dim));
        out.extend(self.material.validate(&params.regularization));
        if out.iter().all(|m| !m.starts_with("domain")) {
            out.extend(self.data.validate(&self.domain.extents, self.domain.dim, self.time.horizon));
        }
        if self.output.cadence == 0 {
            out.push("output.cadence: must be at least 1".into());
        }
        let i = &self.initial;
        if i.snapshot.is_none() && out.iter().all(|m| !m.starts_with("domain")) {
            let ext = &self.domain.extents;
            if i.z.lower_bound(ext) < 0.0 || i.z.upper_bound(ext) > 1.0 {
                out.push("initial.z: initial damage must satisfy 0 <= z0 <= 1".into());
            }
            if !(i.theta.lower_bound(ext) > 0.0) {
                out.push("initial.theta: initial temperature needs theta0 >= theta_* > 0".into());
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), Error> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigInvalid(v))
        }
    }

    /// Build the mesh, the problem and the initial fields.
    pub fn setup(&self) -> Result<RunSetup, Error> {
        self.validate()?;
        let mesh = Mesh::new(&self.domain)?;
        let d = mesh.dim;
        let initial = match &self.initial.snapshot {
            Some(dir) => super::snapshot::read_initial(dir, &mesh)?,
            None => {
                let vec = |parts: &[SpaceProfile]| {
                    let mut out = vec![0.0; d * mesh.n_nodes];
                    for (k, p) in parts.iter().enumerate().take(d) {
                        for (i, v) in p.sample(&mesh).into_iter().enumerate() {
                            out[d * i + k] = v;
                        }
                    }
                    out
                };
                InitialFields {
                    c: self.initial.c.sample(&mesh),
                    z: self.initial.z.sample(&mesh),
                    theta: self.initial.theta.sample(&mesh),
                    u: vec(&self.initial.u),
                    v: vec(&self.initial.v),
                }
            }
        };
        let problem = Problem { mesh, material: self.material.clone(), params: self.scheme_params(), data: self.data.clone() };
        Ok(RunSetup { problem, initial, horizon: self.time.horizon })
    }
}

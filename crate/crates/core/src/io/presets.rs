use std::path::PathBuf;

use super::config::{InitialConfig, OutputConfig, RunConfig, SolverConfig, TimeConfig};
use crate::grid::MeshSpec;
use crate::material::{DamagePotential, ElasticModel, MaterialModel};
use crate::stepper::{ContinuationSettings, DataSampler, ScalarData, SpaceProfile, TimeProfile, VectorData};

/// Built-in scenarios as `(name, description)`.
pub const PRESETS: [(&str, &str); 4] = [
    ("equilibrium", "uniform rest state with zero data; nothing should move"),
    ("spinodal-decomposition", "noisy mixture inside the spinodal region coarsening at constant temperature"),
    ("damage-loading", "bar stretched by a ramped boundary displacement and heated through the boundary"),
    ("thermal-pulse", "Gaussian heat pulse switched on and off, diffusing through an undeformed body"),
];

fn square(cells: usize, side: f64) -> MeshSpec {
    MeshSpec { dim: 2, extents: vec![side, side], cells: vec![cells, cells] }
}

fn base(name: &str, domain: MeshSpec, horizon: f64, tau: f64) -> RunConfig {
    RunConfig {
        domain,
        time: TimeConfig { horizon, tau },
        material: MaterialModel::default(),
        initial: InitialConfig::default(),
        data: DataSampler::default(),
        solver: SolverConfig::default(),
        continuation: ContinuationSettings::default(),
        output: OutputConfig { directory: PathBuf::from(format!("out/{name}")), ..Default::default() },
    }
}

/// Look up a preset by name.
pub fn preset(name: &str) -> Option<RunConfig> {
    let cfg = match name {
        "equilibrium" => base(name, square(16, 1.0), 1.0, 0.02),
        "spinodal-decomposition" => {
            let mut c = base(name, square(16, 8.0), 0.2, 0.02);
            c.initial.c = SpaceProfile::Noise { mean: 0.0, amplitude: 0.05, seed: 7 };
            c
        }
        "damage-loading" => {
            let mut c = base(name, square(16, 1.0), 1.0, 0.02);
            c.material.elastic = ElasticModel {
                lame_lambda: 100.0,
                lame_mu: 100.0,
                viscosity_factor: 0.1,
                eigenstrain: 0.05,
                ..Default::default()
            };
            c.material.sigma = DamagePotential::linear(0.05);
            c.initial.theta = SpaceProfile::uniform(0.1);
            c.initial.z = SpaceProfile::Gaussian { base: 1.0, amplitude: -0.2, center: vec![0.5, 0.5], width: 0.2 };
            c.initial.c = SpaceProfile::Gaussian { base: 0.0, amplitude: 0.1, center: vec![0.3, 0.6], width: 0.25 };
            c.data.h = ScalarData::constant(0.05);
            c.data.u_d = VectorData {
                components: vec![ScalarData {
                    space: SpaceProfile::Linear { value: 0.0, gradient: vec![1.0, 0.0] },
                    time: TimeProfile::Linear { offset: 0.0, rate: 0.2 },
                }],
            };
            c
        }
        "thermal-pulse" => {
            let mut c = base(name, square(16, 1.0), 0.5, 0.02);
            c.data.g = ScalarData {
                space: SpaceProfile::Gaussian { base: 0.0, amplitude: 5.0, center: vec![0.5, 0.5], width: 0.15 },
                time: TimeProfile::Series { points: vec![(0.0, 1.0), (0.2, 1.0), (0.25, 0.0)] },
            };
            c
        }
        _ => return None,
    };
    Some(cfg)
}

//! Manufactured-solution studies for the decoupled sub-physics.
//!
//! Heat: constant conductivity `K`, homogeneous Neumann data, exact solution
//! `1 + cos(pi x) cos(pi y) exp(-t) / 2`. The scheme is the lumped backward Euler step on the same
//! assembly as the coupled solver; the conductivity law of the full model is never constant, so it
//! is bypassed here.
//!
//! Elasticity: the production momentum block at `z = 1`, uniform temperature and no eigenstrain,
//! with exact displacement `U(x) exp(-t)` where `U = (sin pi x sin pi y, cos pi x cos pi y)` is
//! divergence free, so the body force is `U exp(-t) (1 + 2 pi^2 mu (1 - eta))`.
//!
//! Spatial orders are measured against the exact solution with `tau ~ h^2`; temporal orders by
//! Richardson differences on a fixed mesh.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{weighted_stiffness, Mesh, MeshSpec};
use crate::linalg::{band_solve, Assemble, BandMatrix};
use crate::material::{ElasticModel, MaterialModel};
use crate::stepper::{solve_momentum_block, BlockContext, Lagged, Problem, Regularization, SchemeParams, State, StepData};
use crate::stepper::{DataSampler, SolverSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    Heat,
    Elasticity,
}

impl FromStr for Case {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "heat" => Ok(Case::Heat),
            "elasticity" => Ok(Case::Elasticity),
            _ => Err(format!("unknown case `{s}` (expected heat or elasticity)")),
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::Heat => "heat",
            Case::Elasticity => "elasticity",
        })
    }
}

/// Conductivity of the heat study.
pub const HEAT_K: f64 = 0.5;
/// Viscosity factor and Lame constants of the elasticity study.
pub const ELASTIC_ETA: f64 = 0.5;
pub const ELASTIC_LAMBDA: f64 = 1.0;
pub const ELASTIC_MU: f64 = 1.0;

const HORIZON: f64 = 0.1;
const BASE_CELLS: usize = 8;
const TEMPORAL_HORIZON: f64 = 0.4;
const TEMPORAL_CELLS: usize = 8;

/// One run of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub cells: usize,
    pub tau: f64,
    /// Error against the exact solution (spatial) or against the next finer step (temporal).
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Study {
    pub case: Case,
    pub spatial: Vec<Sample>,
    pub spatial_orders: Vec<f64>,
    pub temporal: Vec<Sample>,
    pub temporal_orders: Vec<f64>,
}

impl Study {
    /// Every observed order within `tol` of its expected value (2 in space, 1 in time).
    pub fn within(&self, tol: f64) -> bool {
        let ok = |v: &[f64], e: f64| !v.is_empty() && v.iter().all(|o| (o - e).abs() <= tol);
        ok(&self.spatial_orders, 2.0) && ok(&self.temporal_orders, 1.0)
    }
}

/// `log2(e_j / e_{j+1})` for errors on successively halved parameters.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Run the spatial and temporal study of `case` with `levels >= 3` refinements.
pub fn study(case: Case, levels: usize) -> Result<Study> {
    if levels < 3 {
        return Err(Error::ConfigInvalid(vec![format!("convergence: need at least 3 levels (got {levels})")]));
    }
    let run = |cells: usize, steps: usize, horizon: f64| -> Result<(Mesh, Vec<f64>)> {
        match case {
            Case::Heat => heat_run(cells, steps, horizon),
            Case::Elasticity => elasticity_run(cells, steps, horizon),
        }
    };
    let mut spatial = Vec::new();
    for j in 0..levels {
        let cells = BASE_CELLS << j;
        let steps = 4 << (2 * j);
        let (mesh, x) = run(cells, steps, HORIZON)?;
        let exact = exact_nodal(case, &mesh, HORIZON);
        spatial.push(Sample { cells, tau: HORIZON / steps as f64, error: lumped_l2(&mesh, &x, &exact) });
    }
    let mut sols = Vec::new();
    for j in 0..levels {
        let steps = 8 << j;
        sols.push((steps, run(TEMPORAL_CELLS, steps, TEMPORAL_HORIZON)?));
    }
    let temporal: Vec<Sample> = sols
        .windows(2)
        .map(|w| {
            let (mesh, a) = &w[0].1;
            Sample { cells: TEMPORAL_CELLS, tau: TEMPORAL_HORIZON / w[0].0 as f64, error: lumped_l2(mesh, a, &w[1].1 .1) }
        })
        .collect();
    let se: Vec<f64> = spatial.iter().map(|s| s.error).collect();
    let te: Vec<f64> = temporal.iter().map(|s| s.error).collect();
    Ok(Study { case, spatial_orders: observed_orders(&se), temporal_orders: observed_orders(&te), spatial, temporal })
}

fn unit_square(cells: usize) -> Result<Mesh> {
    Mesh::new(&MeshSpec { dim: 2, extents: vec![1.0, 1.0], cells: vec![cells, cells] })
}

/// `sqrt(sum_i m_i |a_i - b_i|^2)` for scalar or interleaved vector fields.
fn lumped_l2(mesh: &Mesh, a: &[f64], b: &[f64]) -> f64 {
    let d = a.len() / mesh.n_nodes;
    let s: f64 = a.iter().zip(b).enumerate().map(|(j, (x, y))| mesh.lumped[j / d] * (x - y).powi(2)).sum();
    s.sqrt()
}

/// Mean of `exp(-t)` over `[t0, t1]`.
fn exp_mean(t0: f64, t1: f64) -> f64 {
    ((-t0).exp() - (-t1).exp()) / (t1 - t0)
}

fn heat_shape(x: &[f64; 3]) -> f64 {
    0.5 * (PI * x[0]).cos() * (PI * x[1]).cos()
}

fn displacement_shape(x: &[f64; 3]) -> [f64; 2] {
    let (sx, cx) = (PI * x[0]).sin_cos();
    let (sy, cy) = (PI * x[1]).sin_cos();
    [sx * sy, cx * cy]
}

fn vector_nodal(mesh: &Mesh, f: impl Fn(&[f64; 3]) -> [f64; 2]) -> Vec<f64> {
    (0..mesh.n_nodes).flat_map(|i| f(&mesh.coords(i))).collect()
}

fn exact_nodal(case: Case, mesh: &Mesh, t: f64) -> Vec<f64> {
    match case {
        Case::Heat => mesh.nodal(|x| 1.0 + heat_shape(x) * (-t).exp()),
        Case::Elasticity => vector_nodal(mesh, |x| displacement_shape(x).map(|u| u * (-t).exp())),
    }
}

fn heat_run(cells: usize, steps: usize, horizon: f64) -> Result<(Mesh, Vec<f64>)> {
    let mesh = unit_square(cells)?;
    let tau = horizon / steps as f64;
    let n = mesh.n_nodes;
    let bw = mesh.node_bandwidth();
    let shape = mesh.nodal(heat_shape);
    let mut theta = exact_nodal(Case::Heat, &mesh, 0.0);
    let k_q = vec![HEAT_K; mesh.n_elems * mesh.nen];
    let growth = 2.0 * PI * PI * HEAT_K - 1.0;
    for k in 0..steps {
        let (t0, t1) = (k as f64 * tau, (k + 1) as f64 * tau);
        let mut a = BandMatrix::new(n, bw, bw);
        weighted_stiffness(&mesh, &k_q, &mut a);
        let g = growth * exp_mean(t0, t1);
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let m = mesh.lumped[i];
            a.add(i, i, m / tau);
            rhs[i] = m * (theta[i] / tau + shape[i] * g);
        }
        theta = band_solve(a, &rhs)?;
    }
    Ok((mesh, theta))
}

fn elasticity_problem(cells: usize) -> Result<Problem> {
    let material = MaterialModel {
        elastic: ElasticModel {
            lame_lambda: ELASTIC_LAMBDA,
            lame_mu: ELASTIC_MU,
            viscosity_factor: ELASTIC_ETA,
            eigenstrain: 0.0,
            ..Default::default()
        },
        ..Default::default()
    };
    let solver = SolverSettings { newton_tol: 1e-12, ..Default::default() };
    Ok(Problem {
        mesh: unit_square(cells)?,
        material,
        params: SchemeParams { solver, ..SchemeParams::for_dim(2) },
        data: DataSampler::default(),
    })
}

fn elasticity_run(cells: usize, steps: usize, horizon: f64) -> Result<(Mesh, Vec<f64>)> {
    let problem = elasticity_problem(cells)?;
    let mesh = &problem.mesh;
    let tau = horizon / steps as f64;
    let n = mesh.n_nodes;
    let shape = vector_nodal(mesh, displacement_shape);
    let force = 1.0 + 2.0 * PI * PI * ELASTIC_MU * (1.0 - ELASTIC_ETA);
    let mut state = State {
        k: 0,
        t: 0.0,
        c: vec![0.0; n],
        mu: vec![0.0; n],
        z: vec![1.0; n],
        theta: vec![1.0; n],
        u: shape.clone(),
        v: shape.iter().map(|s| -s).collect(),
    };
    for k in 0..steps {
        let (t0, t1) = (k as f64 * tau, (k + 1) as f64 * tau);
        let data = StepData {
            t0,
            t1,
            f: shape.iter().map(|s| s * force * exp_mean(t0, t1)).collect(),
            g: vec![0.0; n],
            hload: vec![0.0; n],
            u_d: shape.iter().map(|s| s * (-t1).exp()).collect(),
            u_d_old: shape.iter().map(|s| s * (-t0).exp()).collect(),
        };
        let lagged = Lagged::new(&problem, &state);
        let ctx = BlockContext::new(&problem, &state, &lagged, &data, tau, Regularization::OFF);
        let (u, v, _) = solve_momentum_block(&ctx, &state.c, &state.z, &state.theta, &state.u)?;
        state = State { k: k + 1, t: t1, u, v, ..state };
    }
    Ok((problem.mesh.clone(), state.u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_of_exact_power_law() {
        let o = observed_orders(&[1.0, 0.25, 0.0625]);
        assert_eq!(o, vec![2.0, 2.0]);
    }

    #[test]
    fn case_names_round_trip() {
        for c in [Case::Heat, Case::Elasticity] {
            assert_eq!(c.to_string().parse::<Case>().unwrap(), c);
        }
        assert!("plasticity".parse::<Case>().is_err());
    }
}

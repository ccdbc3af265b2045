//! One step of the coupled scheme, the continuation safeguard, and the time loop.

pub(crate) mod blocks;
mod coupled;
mod data;
mod lagged;
mod newton;

pub use blocks::{
    ch_residual, damage_residual, momentum_residual, solve_ch_block, solve_damage_block,
    solve_momentum_block, solve_temperature_block, temperature_residual, BlockContext, DamageSolution,
};
pub use coupled::{regularized_step, run, run_with, solve_coupled, step, step_count, step_with, StepOptions};
pub use data::{DataSampler, ScalarData, SpaceProfile, StepData, TimeProfile, VectorData};
pub use lagged::{lagged_evaluations, Lagged};
pub use newton::NewtonStats;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::grid::{Mesh, ScalarField, VectorField};
use crate::material::{MaterialModel, RegularizationParams};

/// Time level `k` of the discrete solution.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub k: usize,
    pub t: f64,
    pub c: ScalarField,
    pub mu: ScalarField,
    pub z: ScalarField,
    pub theta: ScalarField,
    pub u: VectorField,
    /// `(u^k - u^{k-1}) / tau`.
    pub v: VectorField,
}

impl State {
    /// Largest nodal difference over all fields.
    pub fn max_diff(&self, o: &State) -> f64 {
        let pairs = [
            (&self.c, &o.c),
            (&self.mu, &o.mu),
            (&self.z, &o.z),
            (&self.theta, &o.theta),
            (&self.u, &o.u),
            (&self.v, &o.v),
        ];
        pairs
            .iter()
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    pub fn bitwise_eq(&self, o: &State) -> bool {
        let same = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
        self.k == o.k
            && same(&self.c, &o.c)
            && same(&self.mu, &o.mu)
            && same(&self.z, &o.z)
            && same(&self.theta, &o.theta)
            && same(&self.u, &o.u)
            && same(&self.v, &o.v)
    }
}

/// `(new - old) / tau`, componentwise.
pub fn d_tau(new: &[f64], old: &[f64], tau: f64) -> Vec<f64> {
    new.iter().zip(old).map(|(a, b)| (a - b) / tau).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub sweep_tol: f64,
    pub newton_tol: f64,
    pub max_sweeps: usize,
    pub max_newton: usize,
    /// Initial relaxation of the temperature guess between sweeps.
    pub damping: f64,
    pub max_active_set: usize,
    /// Levels of step halving allowed after continuation fails.
    pub max_substep_depth: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            sweep_tol: 1e-10,
            newton_tol: 1e-11,
            max_sweeps: 80,
            max_newton: 40,
            damping: 1.0,
            max_active_set: 100,
            max_substep_depth: 3,
        }
    }
}

/// Homotopy in `(nu, M)` used when a plain step fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuationSettings {
    /// Try the homotopy automatically on failure.
    pub auto: bool,
    pub nu0: f64,
    pub nu_factor: f64,
    pub varrho: f64,
    pub m0: f64,
    pub m_factor: f64,
    /// Number of regularized stages before the target solve.
    pub stages: usize,
}

impl Default for ContinuationSettings {
    fn default() -> Self {
        ContinuationSettings { auto: true, nu0: 1e-2, nu_factor: 1e-2, varrho: 6.0, m0: 1e3, m_factor: 10.0, stages: 3 }
    }
}

impl ContinuationSettings {
    /// Stage list `(nu, M)`, ending with the unregularized target.
    pub fn schedule(&self) -> Vec<Regularization> {
        let mut out = Vec::new();
        let mut nu = self.nu0;
        let mut m = self.m0;
        for _ in 0..self.stages {
            out.push(Regularization { nu, varrho: self.varrho, truncation: Some(m) });
            nu *= self.nu_factor;
            m *= self.m_factor;
        }
        out.push(Regularization::OFF);
        out
    }
}

/// Active `(nu, varrho, M)` of a solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularization {
    pub nu: f64,
    pub varrho: f64,
    pub truncation: Option<f64>,
}

impl Regularization {
    pub const OFF: Regularization = Regularization { nu: 0.0, varrho: 6.0, truncation: None };

    pub fn is_off(&self) -> bool {
        self.nu == 0.0 && self.truncation.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeParams {
    pub tau: f64,
    /// Gradient exponent of the phase and damage energies.
    pub p: f64,
    pub eps_p: f64,
    pub allow_p_le_dim: bool,
    pub regularization: RegularizationParams,
    pub solver: SolverSettings,
    pub continuation: ContinuationSettings,
}

impl Default for SchemeParams {
    fn default() -> Self {
        SchemeParams::for_dim(2)
    }
}

impl SchemeParams {
    pub fn default_p(dim: usize) -> f64 {
        match dim {
            1 => 2.0,
            2 => 3.0,
            _ => 4.0,
        }
    }

    pub fn for_dim(dim: usize) -> Self {
        SchemeParams {
            tau: 0.02,
            p: Self::default_p(dim),
            eps_p: 1e-8,
            allow_p_le_dim: false,
            regularization: RegularizationParams::default(),
            solver: SolverSettings::default(),
            continuation: ContinuationSettings::default(),
        }
    }

    pub fn validate(&self, dim: usize) -> Vec<String> {
        let mut out = Vec::new();
        if !(self.tau > 0.0) {
            out.push(format!("time.tau: time step must be positive (got {})", self.tau));
        }
        if !(self.p > 1.0) {
            out.push(format!("solver.p: gradient exponent requires p > 1 (got {})", self.p));
        } else if self.p <= dim as f64 && !self.allow_p_le_dim {
            out.push(format!(
                "solver.p: standing assumption p > d fails (p = {}, d = {dim}); set allow_p_le_dim to override",
                self.p
            ));
        }
        if !(self.eps_p >= 0.0) {
            out.push("solver.eps_p: gradient regularization must be nonnegative".into());
        }
        let c = &self.continuation;
        if !(c.varrho > 4.0) {
            out.push(format!("continuation.varrho: regularized system requires varrho > 4 (got {})", c.varrho));
        }
        if !(c.nu0 > 0.0 && c.nu_factor > 0.0 && c.nu_factor < 1.0) {
            out.push("continuation: need nu0 > 0 and 0 < nu_factor < 1".into());
        }
        if !(c.m0 > 0.0 && c.m_factor > 1.0) {
            out.push("continuation: need m0 > 0 and m_factor > 1".into());
        }
        let s = &self.solver;
        if !(s.sweep_tol > 0.0 && s.newton_tol > 0.0) {
            out.push("solver: tolerances must be positive".into());
        }
        if !(s.damping > 0.0 && s.damping <= 1.0) {
            out.push("solver.damping: must lie in (0, 1]".into());
        }
        out
    }
}

/// Everything a step needs besides the previous state.
#[derive(Debug, Clone)]
pub struct Problem {
    pub mesh: Mesh,
    pub material: MaterialModel,
    pub params: SchemeParams,
    pub data: DataSampler,
}

impl Problem {
    pub fn step_data(&self, t0: f64, t1: f64) -> Result<StepData, Error> {
        self.data.step_data(&self.mesh, t0, t1)
    }
}

/// Nodal initial fields.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialFields {
    pub c: ScalarField,
    pub z: ScalarField,
    pub theta: ScalarField,
    pub u: VectorField,
    pub v: VectorField,
}

/// Validated state at `k = 0` and the ghost level `u^{-1} = u^0 - tau v^0`.
pub fn init_states(problem: &Problem, init: &InitialFields) -> Result<(State, VectorField), Error> {
    let mesh = &problem.mesh;
    let n = mesh.n_nodes;
    let d = mesh.dim;
    let len_ok = init.c.len() == n
        && init.z.len() == n
        && init.theta.len() == n
        && init.u.len() == d * n
        && init.v.len() == d * n;
    if !len_ok {
        return Err(Error::InvalidInitialData("field lengths do not match the mesh".into()));
    }
    let all = [&init.c, &init.z, &init.theta, &init.u, &init.v];
    if all.iter().any(|f| f.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidInitialData("non-finite initial value".into()));
    }
    if let Some(i) = init.theta.iter().position(|&t| !(t > 0.0)) {
        return Err(Error::InvalidInitialData(format!(
            "initial temperature must be bounded below by a positive constant (node {i} has {})",
            init.theta[i]
        )));
    }
    if let Some(i) = init.z.iter().position(|&z| !(0.0..=1.0).contains(&z)) {
        return Err(Error::InvalidInitialData(format!(
            "initial damage must satisfy 0 <= z0 <= 1 (node {i} has {})",
            init.z[i]
        )));
    }
    let pot = &problem.material.potential;
    if pot.kind == crate::material::PotentialKind::Indicator {
        let (lo, hi) = pot.bounds;
        if let Some(i) = init.c.iter().position(|&c| c < lo || c > hi) {
            return Err(Error::InvalidInitialData(format!(
                "initial concentration must lie in the domain of the potential [{lo}, {hi}] (node {i})"
            )));
        }
    }
    let ud = problem.data.u_d.nodal_value(mesh, 0.0);
    for i in mesh.boundary_nodes() {
        for k in 0..d {
            if (init.u[d * i + k] - ud[d * i + k]).abs() > 1e-12 * (1.0 + ud[d * i + k].abs()) {
                return Err(Error::InvalidInitialData(format!(
                    "initial displacement must match the Dirichlet datum at t = 0 (node {i})"
                )));
            }
        }
    }
    let tau = problem.params.tau;
    let ghost = init.u.iter().zip(&init.v).map(|(u, v)| u - tau * v).collect();
    let mut mu = vec![0.0; n];
    // chemical potential of the initial state is only a warm start; use the lumped drive
    for i in 0..n {
        mu[i] = pot.splitting_drive(init.c[i], init.c[i], &problem.params.regularization)? - init.theta[i];
    }
    let state = State {
        k: 0,
        t: 0.0,
        c: init.c.clone(),
        mu,
        z: init.z.clone(),
        theta: init.theta.clone(),
        u: init.u.clone(),
        v: init.v.clone(),
    };
    Ok((state, ghost))
}

/// Per-block solver statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub k: usize,
    pub t: f64,
    pub sweeps: usize,
    pub ch: BlockReport,
    pub damage: BlockReport,
    pub momentum: BlockReport,
    pub temperature: BlockReport,
    pub active_upper: usize,
    pub active_lower: usize,
    pub complementarity_gap: f64,
    pub theta_min: f64,
    pub theta_max: f64,
    pub mass_defect: f64,
    /// `E^{k-1} + work - E^k`.
    pub energy_residual: f64,
    pub continuation_stages: usize,
    pub substeps: usize,
}

/// Time-indexed states with the reports of the steps that produced them.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub tau: f64,
    pub states: Vec<State>,
    pub reports: Vec<StepReport>,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn differences() {
        assert_eq!(d_tau(&[2.0], &[1.0], 0.5), vec![2.0]);
        let u = [0.0, 1.0, 4.0];
        let v1 = d_tau(&u[1..2], &u[0..1], 1.0);
        let v2 = d_tau(&u[2..3], &u[1..2], 1.0);
        assert_eq!(d_tau(&v2, &v1, 1.0), vec![2.0]);
    }

    #[test]
    fn schedule_ends_unregularized() {
        let s = ContinuationSettings::default().schedule();
        assert_eq!(s.len(), 4);
        assert_eq!(s[0].nu, 1e-2);
        assert_eq!(s[1].truncation, Some(1e4));
        assert!(s[3].is_off());
    }
}

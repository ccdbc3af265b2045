//! Energies, discrete inequalities, conservation and positivity checks, and the grid-search oracle.

mod apriori;
mod check;
mod damage;
mod energy;
mod entropy;
mod oracle;
mod splitting;

pub use apriori::{apriori_norm_tracker, AprioriRow};
pub use check::{check_trajectory, CheckLine, Windows, MASS_TOL};
pub use damage::{check_damage_all, check_damage_inequalities, damage_vi_fields, damage_vi_value};
pub use energy::{
    check_total_energy_all, check_total_energy_inequality, step_energy_residual, step_work, total_energy,
    EnergyBreakdown,
};
pub use entropy::{canonical_test_fields, check_entropy_all, check_entropy_inequality, TestField};
pub use oracle::{brute_force_minimize, SearchBox};
pub use splitting::{splitting_margins, trajectory_splitting_margin, SplittingSample};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::grid::Mesh;
use crate::stepper::{BlockContext, Lagged, Problem, Regularization, State, StepData, Trajectory};

/// One evaluated inequality `lhs <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub kind: String,
    pub s: usize,
    pub t: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub residual: f64,
    pub test_id: Option<usize>,
    pub pass: bool,
}

impl InequalityReport {
    pub fn new(kind: &str, s: usize, t: usize, lhs: f64, rhs: f64, tol: f64, test_id: Option<usize>) -> Self {
        let residual = rhs - lhs;
        InequalityReport {
            kind: kind.to_string(),
            s,
            t,
            lhs,
            rhs,
            residual,
            test_id,
            pass: residual >= -tol * Self::scale_of(lhs, rhs),
        }
    }

    pub fn scale_of(lhs: f64, rhs: f64) -> f64 {
        1.0 + lhs.abs().max(rhs.abs())
    }

    pub fn scale(&self) -> f64 {
        Self::scale_of(self.lhs, self.rhs)
    }

    /// Residual divided by the scale.
    pub fn relative(&self) -> f64 {
        self.residual / self.scale()
    }
}

/// Default relative tolerance of the inequality checks.
pub const INEQUALITY_TOL: f64 = 1e-6;

fn check_window(traj: &Trajectory, s: usize, t: usize) -> Result<(), Error> {
    if s > t || t > traj.steps() {
        return Err(Error::WindowMisaligned { s, t });
    }
    Ok(())
}

/// Data, lagged coefficients and block context of step `k` (from level `k-1` to `k`).
pub(crate) struct StepView {
    pub data: StepData,
    pub lagged: Lagged,
    pub tau: f64,
}

impl StepView {
    pub fn new(problem: &Problem, prev: &State, new: &State) -> Result<Self, Error> {
        Ok(StepView {
            data: problem.step_data(prev.t, new.t)?,
            lagged: Lagged::new(problem, prev),
            tau: new.t - prev.t,
        })
    }

    pub fn ctx<'a>(&'a self, problem: &'a Problem, prev: &'a State) -> BlockContext<'a> {
        BlockContext::new(problem, prev, &self.lagged, &self.data, self.tau, Regularization::OFF)
    }
}

/// `int c^k - int c^0` for every level, with the lumped mass.
pub fn mass_defect(mesh: &Mesh, traj: &Trajectory) -> Vec<f64> {
    let m0 = mesh.integrate(&traj.states[0].c);
    traj.states.iter().map(|s| mesh.integrate(&s.c) - m0).collect()
}

/// Mass defect relative to `max(|Omega|, |int c^0|)`.
pub fn relative_mass_defect(mesh: &Mesh, traj: &Trajectory) -> Vec<f64> {
    let m0 = mesh.integrate(&traj.states[0].c);
    let scale = mesh.volume().max(m0.abs());
    mass_defect(mesh, traj).iter().map(|d| d.abs() / scale).collect()
}

/// Lower temperature bound `theta_* / (1 + C T theta_*)` for a user-supplied constant `C`.
pub fn theta_floor(theta_star: f64, c: f64, horizon: f64) -> f64 {
    theta_star / (1.0 + c * horizon * theta_star)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    /// Minimum temperature per level.
    pub minima: Vec<f64>,
    pub global_min: f64,
    /// Levels with a nonpositive node.
    pub violations: Vec<usize>,
}

impl PositivityReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn positivity_report(traj: &Trajectory) -> PositivityReport {
    let minima: Vec<f64> = traj.states.iter().map(|s| s.theta.iter().cloned().fold(f64::INFINITY, f64::min)).collect();
    let global_min = minima.iter().cloned().fold(f64::INFINITY, f64::min);
    let violations = minima.iter().enumerate().filter(|(_, &m)| !(m > 0.0)).map(|(k, _)| k).collect();
    PositivityReport { minima, global_min, violations }
}

/// Pointwise constraint check of one step: irreversibility, bounds, positivity and the Dirichlet trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub damage_bounds: bool,
    pub damage_monotone: bool,
    pub theta_positive: bool,
    pub dirichlet_exact: bool,
}

impl ConstraintCheck {
    pub fn all(&self) -> bool {
        self.damage_bounds && self.damage_monotone && self.theta_positive && self.dirichlet_exact
    }
}

pub fn check_constraints(problem: &Problem, prev: &State, new: &State) -> ConstraintCheck {
    let mesh = &problem.mesh;
    let d = mesh.dim;
    let ud = problem.data.u_d.nodal_value(mesh, new.t);
    ConstraintCheck {
        damage_bounds: new.z.iter().all(|&z| (0.0..=1.0).contains(&z)),
        damage_monotone: new.z.iter().zip(&prev.z).all(|(a, b)| a <= b),
        theta_positive: new.theta.iter().all(|&t| t > 0.0),
        dirichlet_exact: mesh
            .boundary_nodes()
            .all(|i| (0..d).all(|k| new.u[d * i + k] == ud[d * i + k])),
    }
}

/// All grid windows `0 <= s < t <= K`.
pub fn all_windows(traj: &Trajectory) -> Vec<(usize, usize)> {
    let n = traj.steps();
    (0..n).flat_map(|s| (s + 1..=n).map(move |t| (s, t))).collect()
}

use serde::{Deserialize, Serialize};

use super::{check_window, InequalityReport, StepView, INEQUALITY_TOL};
use crate::error::Error;
use crate::grid::{div_moments, element_conductivity, heat_diffusion_action, Mesh};
use crate::stepper::blocks::temperature_terms;
use crate::stepper::{Problem, State, Trajectory};

/// Nonnegative test field `phi(x, t) = base(x) (1 + rate t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestField {
    pub id: usize,
    pub name: String,
    pub base: Vec<f64>,
    pub rate: f64,
}

impl TestField {
    pub fn at(&self, t: f64) -> Vec<f64> {
        let s = 1.0 + self.rate * t;
        self.base.iter().map(|b| b * s).collect()
    }
}

fn tent(mesh: &Mesh, center: [f64; 3], radius: f64) -> Vec<f64> {
    mesh.nodal(|x| (0..mesh.dim).map(|k| (1.0 - (x[k] - center[k]).abs() / radius).max(0.0)).product())
}

/// The constant field, four tent bumps (centre and three corners) and one bump growing linearly in time.
pub fn canonical_test_fields(mesh: &Mesh) -> Vec<TestField> {
    let ext = &mesh.spec.extents;
    let r = 0.4 * ext.iter().cloned().fold(f64::INFINITY, f64::min);
    let at = |f: [f64; 3]| {
        let mut c = [0.0; 3];
        for k in 0..mesh.dim {
            c[k] = f[k] * ext[k];
        }
        c
    };
    let centers = [
        ("center", at([0.5, 0.5, 0.5])),
        ("corner-low", at([0.0, 0.0, 0.0])),
        ("corner-high", at([1.0, 1.0, 1.0])),
        ("corner-mixed", at([1.0, 0.0, 1.0])),
    ];
    let mut out = vec![TestField { id: 0, name: "constant".into(), base: vec![1.0; mesh.n_nodes], rate: 0.0 }];
    for (n, (name, c)) in centers.iter().enumerate() {
        out.push(TestField { id: n + 1, name: (*name).into(), base: tent(mesh, *c, r), rate: 0.0 });
    }
    out.push(TestField { id: 5, name: "growing-center".into(), base: tent(mesh, centers[0].1, r), rate: 1.0 });
    out
}

fn log_entropy(s: &State) -> Vec<f64> {
    (0..s.theta.len()).map(|i| s.theta[i].max(1e-14).ln() + s.c[i] + s.z[i]).collect()
}

fn check_positive(s: &State) -> Result<(), Error> {
    match s.theta.iter().position(|&t| !(t > 0.0)) {
        Some(i) => Err(Error::NonpositiveTemperature { element: i, value: s.theta[i] }),
        None => Ok(()),
    }
}

/// Contributions `(lhs_k, rhs_k)` of step `k` (levels `k-1 -> k`), without the boundary-in-time term.
fn step_increment(problem: &Problem, prev: &State, new: &State, field: &TestField) -> Result<(f64, f64), Error> {
    let mesh = &problem.mesh;
    let rho = problem.material.heat.rho;
    let mut heat = problem.material.heat.clone();
    heat.truncation = None;
    let view = StepView::new(problem, prev, new)?;
    let ctx = view.ctx(problem, prev);
    let tau = view.tau;
    let phi = field.at(new.t);
    let phi_old = field.at(prev.t);
    let l_old = log_entropy(prev);
    let b = div_moments(mesh, &new.v);
    let (ke, _) = element_conductivity(mesh, &new.theta, &heat);
    let log_theta: Vec<f64> = new.theta.iter().map(|t| t.ln()).collect();
    let d1: f64 = heat_diffusion_action(mesh, &log_theta, &ke).iter().zip(&phi).map(|(a, p)| a * p).sum();
    let a_theta = heat_diffusion_action(mesh, &new.theta, &ke);
    let tt = temperature_terms(&ctx, &new.c, &new.mu, &new.z, &new.v);
    let mut lhs = 0.0;
    let mut cross = 0.0;
    let mut src = 0.0;
    for i in 0..mesh.n_nodes {
        lhs += mesh.lumped[i] * l_old[i] * (phi[i] - phi_old[i]) - tau * rho * b[i] * phi[i];
        let w = phi[i] / new.theta[i];
        cross += a_theta[i] * w;
        src += (tt.source[i] + view.data.hload[i]) * w;
    }
    let d2 = d1 - cross;
    Ok((lhs - tau * d1, -tau * (d2 + src)))
}

fn validate(traj: &Trajectory, s: usize, t: usize, field: &TestField) -> Result<(), Error> {
    check_window(traj, s, t)?;
    for lvl in s..=t {
        check_positive(&traj.states[lvl])?;
        if let Some(i) = field.at(traj.states[lvl].t).iter().position(|&v| v < 0.0) {
            return Err(Error::NegativeTestFunction { node: i });
        }
    }
    Ok(())
}

fn boundary_term(mesh: &Mesh, traj: &Trajectory, s: usize, t: usize, field: &TestField) -> f64 {
    let phi_t = field.at(traj.states[t].t);
    let phi_s = field.at(traj.states[s].t);
    let lt = log_entropy(&traj.states[t]);
    let ls = log_entropy(&traj.states[s]);
    (0..mesh.n_nodes).map(|i| mesh.lumped[i] * (lt[i] * phi_t[i] - ls[i] * phi_s[i])).sum()
}

/// Entropy inequality over the window `(s, t]` for one test field.
pub fn check_entropy_inequality(
    problem: &Problem,
    traj: &Trajectory,
    s: usize,
    t: usize,
    field: &TestField,
) -> Result<InequalityReport, Error> {
    validate(traj, s, t, field)?;
    let mut lhs = 0.0;
    let mut rhs = boundary_term(&problem.mesh, traj, s, t, field);
    for k in s + 1..=t {
        let (l, r) = step_increment(problem, &traj.states[k - 1], &traj.states[k], field)?;
        lhs += l;
        rhs += r;
    }
    Ok(InequalityReport::new("entropy", s, t, lhs, rhs, INEQUALITY_TOL, Some(field.id)))
}

/// Entropy inequality for every window and every field, sharing the per-step work.
pub fn check_entropy_all(
    problem: &Problem,
    traj: &Trajectory,
    fields: &[TestField],
) -> Result<Vec<InequalityReport>, Error> {
    let mut out = Vec::new();
    let n = traj.steps();
    for field in fields {
        validate(traj, 0, n, field)?;
        let inc = traj
            .states
            .windows(2)
            .map(|p| step_increment(problem, &p[0], &p[1], field))
            .collect::<Result<Vec<_>, _>>()?;
        for (s, t) in super::all_windows(traj) {
            let lhs: f64 = inc[s..t].iter().map(|x| x.0).sum();
            let rhs = inc[s..t].iter().map(|x| x.1).sum::<f64>() + boundary_term(&problem.mesh, traj, s, t, field);
            out.push(InequalityReport::new("entropy", s, t, lhs, rhs, INEQUALITY_TOL, Some(field.id)));
        }
    }
    Ok(out)
}

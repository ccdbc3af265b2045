use serde::{Deserialize, Serialize};

use super::{check_window, InequalityReport, StepView, INEQUALITY_TOL};
use crate::error::Error;
use crate::grid::PLaplacian;
use crate::stepper::{momentum_residual, Problem, State, StepData, Trajectory};

/// Parts of the discrete total energy.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub grad_c: f64,
    pub grad_z: f64,
    pub elastic: f64,
    pub phi: f64,
    pub sigma: f64,
    pub thermal: f64,
    pub kinetic: f64,
    pub total: f64,
}

/// Total energy with the regularized potential and elastic density, evaluated with the scheme's quadrature.
pub fn total_energy(problem: &Problem, s: &State) -> Result<EnergyBreakdown, Error> {
    let mesh = &problem.mesh;
    let mat = &problem.material;
    let reg = &problem.params.regularization;
    let pl = PLaplacian { p: problem.params.p, eps: problem.params.eps_p };
    let mut e = EnergyBreakdown { grad_c: pl.energy(mesh, &s.c), grad_z: pl.energy(mesh, &s.z), ..Default::default() };
    for el in 0..mesh.n_elems {
        for q in 0..mesh.nen {
            let c = mesh.interp(&s.c, el, q);
            let z = mesh.interp(&s.z, el, q);
            e.elastic += mesh.quad.weight * reg.w_omega(&mat.elastic, c, &mesh.strain(&s.u, el, q), z);
        }
    }
    let d = mesh.dim;
    for i in 0..mesh.n_nodes {
        let m = mesh.lumped[i];
        e.phi += m * mat.potential.phi_omega(s.c[i], reg)?;
        e.sigma += m * mat.sigma.value(s.z[i]);
        e.thermal += m * s.theta[i];
        e.kinetic += 0.5 * m * (0..d).map(|k| s.v[d * i + k].powi(2)).sum::<f64>();
    }
    e.total = e.grad_c + e.grad_z + e.elastic + e.phi + e.sigma + e.thermal + e.kinetic;
    Ok(e)
}

/// Energy supplied during one step: heat sources, boundary flux, body force and boundary reaction power.
pub fn step_work(problem: &Problem, prev: &State, new: &State) -> Result<f64, Error> {
    let view = StepView::new(problem, prev, new)?;
    work_with(problem, prev, new, &view.data, &view)
}

fn work_with(problem: &Problem, prev: &State, new: &State, data: &StepData, view: &StepView) -> Result<f64, Error> {
    let mesh = &problem.mesh;
    let d = mesh.dim;
    let tau = view.tau;
    let ctx = view.ctx(problem, prev);
    let reac = momentum_residual(&ctx, &new.c, &new.z, &new.theta, &new.u);
    let mut w = tau * (mesh.integrate(&data.g) + data.hload.iter().sum::<f64>());
    for i in 0..mesh.n_nodes {
        for k in 0..d {
            let j = d * i + k;
            let du = new.u[j] - prev.u[j];
            w += mesh.lumped[i] * data.f[j] * du;
            if mesh.boundary[i] {
                w += reac[j] * du;
            }
        }
    }
    Ok(w)
}

/// `E(prev) + work - E(new)` for one step; nonnegative up to solver tolerance.
pub fn step_energy_residual(problem: &Problem, prev: &State, new: &State, data: &StepData) -> Result<f64, Error> {
    let view = StepView { data: data.clone(), lagged: crate::stepper::Lagged::new(problem, prev), tau: new.t - prev.t };
    let w = work_with(problem, prev, new, data, &view)?;
    Ok(total_energy(problem, prev)?.total + w - total_energy(problem, new)?.total)
}

/// `E(t) <= E(s) + sum of supplied work over (s, t]`.
pub fn check_total_energy_inequality(
    problem: &Problem,
    traj: &Trajectory,
    s: usize,
    t: usize,
) -> Result<InequalityReport, Error> {
    check_window(traj, s, t)?;
    let mut work = 0.0;
    for k in s + 1..=t {
        work += step_work(problem, &traj.states[k - 1], &traj.states[k])?;
    }
    let lhs = total_energy(problem, &traj.states[t])?.total;
    let rhs = total_energy(problem, &traj.states[s])?.total + work;
    Ok(InequalityReport::new("total-energy", s, t, lhs, rhs, INEQUALITY_TOL, None))
}

/// Energies and step works of a whole trajectory, for sweeping many windows at once.
pub(crate) fn energy_series(problem: &Problem, traj: &Trajectory) -> Result<(Vec<f64>, Vec<f64>), Error> {
    let e = traj.states.iter().map(|s| total_energy(problem, s).map(|b| b.total)).collect::<Result<Vec<_>, _>>()?;
    let w = traj.states.windows(2).map(|p| step_work(problem, &p[0], &p[1])).collect::<Result<Vec<_>, _>>()?;
    Ok((e, w))
}

/// Total energy inequality for every window of the trajectory.
pub fn check_total_energy_all(problem: &Problem, traj: &Trajectory) -> Result<Vec<InequalityReport>, Error> {
    let (e, w) = energy_series(problem, traj)?;
    let mut out = Vec::new();
    for (s, t) in super::all_windows(traj) {
        let work: f64 = w[s..t].iter().sum();
        out.push(InequalityReport::new("total-energy", s, t, e[t], e[s] + work, INEQUALITY_TOL, None));
    }
    Ok(out)
}

use super::{check_window, InequalityReport, StepView, INEQUALITY_TOL};
use crate::error::Error;
use crate::grid::PLaplacian;
use crate::stepper::blocks::damage_w_load;
use crate::stepper::{damage_residual, Problem, State, Trajectory};

/// Admissible comparison fields `0 <= zeta <= z_old` for the damage variational inequality:
/// `0`, `z_old`, `z_old / 2`, the solution itself, and single-node moves of the solution to either bound.
pub fn damage_vi_fields(z_old: &[f64], z: &[f64]) -> Vec<Vec<f64>> {
    let n = z.len();
    let mut out = vec![vec![0.0; n], z_old.to_vec(), z_old.iter().map(|v| 0.5 * v).collect(), z.to_vec()];
    let stride = (n / 8).max(1);
    for i in (0..n).step_by(stride) {
        let mut up = z.to_vec();
        up[i] = z_old[i];
        out.push(up);
        let mut down = z.to_vec();
        down[i] = 0.0;
        out.push(down);
    }
    out
}

/// `sum_i F_i(z) (zeta_i - z_i)` for the damage residual `F` of the step `prev -> new`.
pub fn damage_vi_value(problem: &Problem, prev: &State, new: &State, zeta: &[f64]) -> Result<f64, Error> {
    if let Some(i) = (0..zeta.len()).find(|&i| !(zeta[i] >= 0.0 && zeta[i] <= prev.z[i])) {
        return Err(Error::InadmissibleTestField { node: i });
    }
    let view = StepView::new(problem, prev, new)?;
    let ctx = view.ctx(problem, prev);
    let f = damage_residual(&ctx, &new.c, &new.theta, &new.z);
    Ok(f.iter().zip(zeta.iter().zip(&new.z)).map(|(f, (a, b))| f * (a - b)).sum())
}

fn dissipation_parts(problem: &Problem, prev: &State, new: &State) -> Result<(f64, f64), Error> {
    let mesh = &problem.mesh;
    let view = StepView::new(problem, prev, new)?;
    let ctx = view.ctx(problem, prev);
    let fw = damage_w_load(&ctx, &new.c, &new.z);
    let mut diss = 0.0;
    let mut drive = 0.0;
    for i in 0..mesh.n_nodes {
        let dz = new.z[i] - prev.z[i];
        diss += mesh.lumped[i] * dz * dz / view.tau;
        drive += dz * (mesh.lumped[i] * new.theta[i] - fw[i]);
    }
    Ok((diss, drive))
}

fn damage_energy(problem: &Problem, s: &State) -> f64 {
    let mesh = &problem.mesh;
    let pl = PLaplacian { p: problem.params.p, eps: problem.params.eps_p };
    pl.energy(mesh, &s.z) + (0..mesh.n_nodes).map(|i| mesh.lumped[i] * problem.material.sigma.value(s.z[i])).sum::<f64>()
}

/// Damage energy-dissipation inequality and the worst damage variational inequality over `(s, t]`.
pub fn check_damage_inequalities(
    problem: &Problem,
    traj: &Trajectory,
    s: usize,
    t: usize,
) -> Result<(InequalityReport, InequalityReport), Error> {
    check_window(traj, s, t)?;
    let mut lhs = damage_energy(problem, &traj.states[t]);
    let mut rhs = damage_energy(problem, &traj.states[s]);
    let mut worst: Option<InequalityReport> = None;
    for k in s + 1..=t {
        let prev = &traj.states[k - 1];
        let new = &traj.states[k];
        let (diss, drive) = dissipation_parts(problem, prev, new)?;
        lhs += diss;
        rhs += drive;
        for (id, zeta) in damage_vi_fields(&prev.z, &new.z).iter().enumerate() {
            let v = damage_vi_value(problem, prev, new, zeta)?;
            let r = InequalityReport::new("damage-vi", k - 1, k, 0.0, v, INEQUALITY_TOL, Some(id));
            if worst.as_ref().map_or(true, |w| r.relative() < w.relative()) {
                worst = Some(r);
            }
        }
    }
    let ed = InequalityReport::new("damage-energy", s, t, lhs, rhs, INEQUALITY_TOL, None);
    let vi = worst.unwrap_or_else(|| InequalityReport::new("damage-vi", s, t, 0.0, 0.0, INEQUALITY_TOL, None));
    Ok((ed, vi))
}

/// Damage energy-dissipation inequality on every window, and the variational inequality at every step
/// (one report per step, the worst comparison field).
pub fn check_damage_all(problem: &Problem, traj: &Trajectory) -> Result<(Vec<InequalityReport>, Vec<InequalityReport>), Error> {
    let energy: Vec<f64> = traj.states.iter().map(|s| damage_energy(problem, s)).collect();
    let mut parts = Vec::with_capacity(traj.steps());
    let mut vi = Vec::with_capacity(traj.steps());
    for k in 1..traj.states.len() {
        let (prev, new) = (&traj.states[k - 1], &traj.states[k]);
        parts.push(dissipation_parts(problem, prev, new)?);
        let mut worst: Option<InequalityReport> = None;
        for (id, zeta) in damage_vi_fields(&prev.z, &new.z).iter().enumerate() {
            let v = damage_vi_value(problem, prev, new, zeta)?;
            let r = InequalityReport::new("damage-vi", k - 1, k, 0.0, v, INEQUALITY_TOL, Some(id));
            if worst.as_ref().map_or(true, |w| r.relative() < w.relative()) {
                worst = Some(r);
            }
        }
        vi.extend(worst);
    }
    let ed = super::all_windows(traj)
        .into_iter()
        .map(|(s, t)| {
            let lhs = energy[t] + parts[s..t].iter().map(|p| p.0).sum::<f64>();
            let rhs = energy[s] + parts[s..t].iter().map(|p| p.1).sum::<f64>();
            InequalityReport::new("damage-energy", s, t, lhs, rhs, INEQUALITY_TOL, None)
        })
        .collect();
    Ok((ed, vi))
}

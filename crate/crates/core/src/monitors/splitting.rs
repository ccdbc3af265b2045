use crate::error::Error;
use crate::grid::PLaplacian;
use crate::material::{MaterialModel, RegularizationParams, Sym};
use crate::stepper::{Problem, SchemeParams, Trajectory};

/// Old and new values at one point, for the convex-concave and convexity estimates of one step.
#[derive(Debug, Clone, Copy)]
pub struct SplittingSample {
    pub c_old: f64,
    pub c_new: f64,
    pub z_old: f64,
    pub z_new: f64,
    pub eps_old: Sym,
    pub eps_new: Sym,
    pub grad_c_old: [f64; 3],
    pub grad_c_new: [f64; 3],
    pub grad_z_old: [f64; 3],
    pub grad_z_new: [f64; 3],
    /// `u^{k-2}, u^{k-1}, u^k` of one displacement component.
    pub u: [f64; 3],
}

fn margin(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs) / (1.0 + lhs.abs() + rhs.abs())
}

fn norm2(g: &[f64; 3]) -> f64 {
    g[0] * g[0] + g[1] * g[1] + g[2] * g[2]
}

fn power_margin(r: f64, new: f64, old: f64) -> f64 {
    let lhs = new.abs().powf(r - 2.0) * new * (new - old);
    margin(lhs, (new.abs().powf(r) - old.abs().powf(r)) / r)
}

/// Relative margins `(lhs - rhs) / (1 + |lhs| + |rhs|)` of every splitting and convexity estimate
/// at one sample. All entries are nonnegative up to round-off.
///
/// Order: concentration potential, damage potential, elastic density, gradient of `c`,
/// gradient of `z`, `|c|^varrho`, `|z|^varrho`, `|eps|^varrho`, inertia.
pub fn splitting_margins(
    material: &MaterialModel,
    reg: &RegularizationParams,
    params: &SchemeParams,
    s: &SplittingSample,
) -> Result<[f64; 9], Error> {
    let pot = &material.potential;
    let el = &material.elastic;
    let dc = s.c_new - s.c_old;
    let dz = s.z_new - s.z_old;
    let phi = margin(
        pot.splitting_drive(s.c_new, s.c_old, reg)? * dc,
        pot.phi_omega(s.c_new, reg)? - pot.phi_omega(s.c_old, reg)?,
    );
    let sig = margin(
        material.sigma.splitting_drive(s.z_new, s.z_old) * dz,
        material.sigma.value(s.z_new) - material.sigma.value(s.z_old),
    );
    let (drive_c, drive_z, stress) =
        reg.w_splitting_drives(el, s.c_new, s.c_old, s.z_new, s.z_old, &s.eps_old, &s.eps_new);
    let w = margin(
        drive_c * dc + stress.ddot(&(s.eps_new - s.eps_old)) + drive_z * dz,
        reg.w_omega(el, s.c_new, &s.eps_new, s.z_new) - reg.w_omega(el, s.c_old, &s.eps_old, s.z_old),
    );
    let pl = PLaplacian { p: params.p, eps: params.eps_p };
    let grad = |new: &[f64; 3], old: &[f64; 3]| {
        let g2 = norm2(new);
        let dot: f64 = (0..3).map(|k| new[k] * (new[k] - old[k])).sum();
        margin(pl.flux_factor(g2) * dot, pl.density(g2) - pl.density(norm2(old)))
    };
    let r = params.continuation.varrho;
    let en = s.eps_new.norm();
    let lhs_eps = en.powf(r - 2.0) * s.eps_new.ddot(&(s.eps_new - s.eps_old));
    let eps_m = margin(lhs_eps, (en.powf(r) - s.eps_old.norm().powf(r)) / r);
    let [u2, u1, u0] = s.u;
    let inertia = margin((u0 - 2.0 * u1 + u2) * (u0 - u1), 0.5 * (u0 - u1).powi(2) - 0.5 * (u1 - u2).powi(2));
    Ok([
        phi,
        sig,
        w,
        grad(&s.grad_c_new, &s.grad_c_old),
        grad(&s.grad_z_new, &s.grad_z_old),
        power_margin(r, s.c_new, s.c_old),
        power_margin(r, s.z_new, s.z_old),
        eps_m,
        inertia,
    ])
}

/// Smallest margin over every quadrature point and displacement component of every step.
pub fn trajectory_splitting_margin(problem: &Problem, traj: &Trajectory) -> Result<f64, Error> {
    let mesh = &problem.mesh;
    let d = mesh.dim;
    let reg = &problem.params.regularization;
    let mut worst = f64::INFINITY;
    for k in 1..traj.states.len() {
        let prev = &traj.states[k - 1];
        let new = &traj.states[k];
        let tau = new.t - prev.t;
        for e in 0..mesh.n_elems {
            for q in 0..mesh.nen {
                let a = mesh.nodes(e)[q];
                let mut u = [0.0; 3];
                let comp = (e + q) % d;
                let j = d * a + comp;
                u[0] = prev.u[j] - tau * prev.v[j];
                u[1] = prev.u[j];
                u[2] = new.u[j];
                let s = SplittingSample {
                    c_old: mesh.interp(&prev.c, e, q),
                    c_new: mesh.interp(&new.c, e, q),
                    z_old: mesh.interp(&prev.z, e, q),
                    z_new: mesh.interp(&new.z, e, q),
                    eps_old: mesh.strain(&prev.u, e, q),
                    eps_new: mesh.strain(&new.u, e, q),
                    grad_c_old: mesh.grad(&prev.c, e, q),
                    grad_c_new: mesh.grad(&new.c, e, q),
                    grad_z_old: mesh.grad(&prev.z, e, q),
                    grad_z_new: mesh.grad(&new.z, e, q),
                    u,
                };
                let m = splitting_margins(&problem.material, reg, &problem.params, &s)?;
                worst = m.iter().cloned().fold(worst, f64::min);
            }
        }
    }
    Ok(worst)
}

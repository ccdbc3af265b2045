use serde::{Deserialize, Serialize};

use crate::grid::{Mesh, PLaplacian};
use crate::stepper::{Problem, Trajectory};

/// Cumulative discrete norms up to level `k`. Diagnostic only.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AprioriRow {
    pub k: usize,
    pub sup_c_w1p: f64,
    pub sum_dc_l2: f64,
    pub sum_plap_c: f64,
    pub sum_mu_h1: f64,
    pub sup_z_w1p: f64,
    pub sum_dz_l2: f64,
    pub sum_theta_h1: f64,
    pub sum_theta_power_h1: f64,
    pub sum_log_theta_h1: f64,
    pub sum_dtheta_l1: f64,
    pub sup_u_h1: f64,
    pub sup_v_l2: f64,
}

fn grad_sq(mesh: &Mesh, f: &[f64]) -> f64 {
    let mut s = 0.0;
    for e in 0..mesh.n_elems {
        for q in 0..mesh.nen {
            let g = mesh.grad(f, e, q);
            s += mesh.quad.weight * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
        }
    }
    s
}

fn w1p(mesh: &Mesh, f: &[f64], p: f64) -> f64 {
    let mut s: f64 = (0..mesh.n_nodes).map(|i| mesh.lumped[i] * f[i].abs().powf(p)).sum();
    for e in 0..mesh.n_elems {
        for q in 0..mesh.nen {
            let g = mesh.grad(f, e, q);
            s += mesh.quad.weight * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).powf(0.5 * p);
        }
    }
    s.powf(1.0 / p)
}

fn h1_sq(mesh: &Mesh, f: &[f64]) -> f64 {
    mesh.integrate(&f.iter().map(|v| v * v).collect::<Vec<_>>()) + grad_sq(mesh, f)
}

/// Running suprema and time sums of the quantities bounded by the a priori estimates.
///
/// `alpha` sets the exponent `(kappa + alpha) / 2` of the temperature power.
pub fn apriori_norm_tracker(problem: &Problem, traj: &Trajectory, alpha: f64) -> Vec<AprioriRow> {
    let mesh = &problem.mesh;
    let d = mesh.dim;
    let p = problem.params.p;
    let pl = PLaplacian { p, eps: problem.params.eps_p };
    let expo = 0.5 * (problem.material.heat.kappa + alpha);
    let u_h1 = |u: &[f64]| {
        let mut s: f64 = (0..mesh.n_nodes).map(|i| mesh.lumped[i] * (0..d).map(|k| u[d * i + k].powi(2)).sum::<f64>()).sum();
        for e in 0..mesh.n_elems {
            for q in 0..mesh.nen {
                let g = mesh.vgrad(u, e, q);
                s += mesh.quad.weight * g.iter().flatten().map(|v| v * v).sum::<f64>();
            }
        }
        s.sqrt()
    };
    let l2v = |v: &[f64]| {
        (0..mesh.n_nodes).map(|i| mesh.lumped[i] * (0..d).map(|k| v[d * i + k].powi(2)).sum::<f64>()).sum::<f64>().sqrt()
    };
    let s0 = &traj.states[0];
    let mut row = AprioriRow {
        k: 0,
        sup_c_w1p: w1p(mesh, &s0.c, p),
        sup_z_w1p: w1p(mesh, &s0.z, p),
        sup_u_h1: u_h1(&s0.u),
        sup_v_l2: l2v(&s0.v),
        ..Default::default()
    };
    let mut out = vec![row.clone()];
    for k in 1..traj.states.len() {
        let prev = &traj.states[k - 1];
        let s = &traj.states[k];
        let tau = s.t - prev.t;
        row.k = k;
        row.sup_c_w1p = row.sup_c_w1p.max(w1p(mesh, &s.c, p));
        row.sup_z_w1p = row.sup_z_w1p.max(w1p(mesh, &s.z, p));
        row.sup_u_h1 = row.sup_u_h1.max(u_h1(&s.u));
        row.sup_v_l2 = row.sup_v_l2.max(l2v(&s.v));
        let pc = pl.residual(mesh, &s.c);
        for i in 0..mesh.n_nodes {
            let m = mesh.lumped[i];
            row.sum_dc_l2 += m * (s.c[i] - prev.c[i]).powi(2) / tau;
            row.sum_dz_l2 += m * (s.z[i] - prev.z[i]).powi(2) / tau;
            row.sum_dtheta_l1 += m * (s.theta[i] - prev.theta[i]).abs();
            row.sum_plap_c += tau * pc[i] * pc[i] / m;
        }
        row.sum_mu_h1 += tau * h1_sq(mesh, &s.mu);
        row.sum_theta_h1 += tau * h1_sq(mesh, &s.theta);
        let tp: Vec<f64> = s.theta.iter().map(|t| t.max(0.0).powf(expo)).collect();
        row.sum_theta_power_h1 += tau * grad_sq(mesh, &tp);
        let lt: Vec<f64> = s.theta.iter().map(|t| t.max(1e-14).ln()).collect();
        row.sum_log_theta_h1 += tau * h1_sq(mesh, &lt);
        out.push(row.clone());
    }
    out
}

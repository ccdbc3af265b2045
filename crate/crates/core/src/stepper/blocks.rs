//! The four block solves of one sweep.

use super::newton::{newton, NewtonStats};
use super::{Lagged, Problem, Regularization, State, StepData};
use crate::error::Error;
use crate::grid::{
    div_moments, heat_diffusion_action, heat_diffusion_jacobian, element_conductivity, isotropic_stiffness,
    quad_load, quad_mass, stress_residual, weighted_stiffness, weighted_stiffness_action, Mesh, PLaplacian,
};
use crate::linalg::{band_solve, Assemble, BandMatrix, Block};
use crate::material::{HeatModel, Sym};

/// Fixed inputs of the block solves within one step.
pub struct BlockContext<'a> {
    pub problem: &'a Problem,
    pub prev: &'a State,
    pub lagged: &'a Lagged,
    pub data: &'a StepData,
    pub tau: f64,
    pub reg: Regularization,
    /// Heat model with the active truncation level.
    pub heat: HeatModel,
    /// Effective modulus; momentum residuals are measured relative to it.
    pub modulus: f64,
}

impl<'a> BlockContext<'a> {
    pub fn new(
        problem: &'a Problem,
        prev: &'a State,
        lagged: &'a Lagged,
        data: &'a StepData,
        tau: f64,
        reg: Regularization,
    ) -> Self {
        let mut heat = problem.material.heat.clone();
        heat.truncation = reg.truncation;
        let el = &problem.material.elastic;
        let a_max = lagged.viscosity.iter().fold(0.0f64, |m, &a| m.max(a));
        let stiff = (problem.mesh.dim as f64 * el.lame_lambda.abs() + 2.0 * el.lame_mu) * (1.0 + a_max / tau);
        BlockContext { problem, prev, lagged, data, tau, reg, heat, modulus: stiff.max(1.0) }
    }

    /// Weights of the scaled momentum residual: lumped mass times the modulus.
    pub(crate) fn momentum_weights(&self) -> Vec<f64> {
        let d = self.mesh().dim;
        self.mesh().lumped.iter().flat_map(|&m| std::iter::repeat(m * self.modulus).take(d)).collect()
    }

    fn mesh(&self) -> &Mesh {
        &self.problem.mesh
    }

    fn plap(&self) -> PLaplacian {
        PLaplacian { p: self.problem.params.p, eps: self.problem.params.eps_p }
    }

    fn nu_power(&self) -> PLaplacian {
        PLaplacian { p: self.reg.varrho, eps: self.problem.params.eps_p }
    }

    /// Nodal `T_M(theta)`.
    fn truncated(&self, theta: &[f64]) -> Vec<f64> {
        theta.iter().map(|&t| self.heat.t_m(t)).collect()
    }

    /// `|x|^{varrho - 2} x` and its derivative.
    fn penalty(&self, x: f64) -> (f64, f64) {
        if self.reg.nu == 0.0 {
            return (0.0, 0.0);
        }
        let r = self.reg.varrho;
        (self.reg.nu * x.abs().powf(r - 2.0) * x, self.reg.nu * (r - 1.0) * x.abs().powf(r - 2.0))
    }
}

fn interleave_weights(m: &[f64], k: usize) -> Vec<f64> {
    m.iter().flat_map(|&v| std::iter::repeat(v).take(k)).collect()
}

// ---------------------------------------------------------------------------------------------
// Cahn-Hilliard

/// Interleaved residual `(R_c, R_mu)` of the concentration and chemical potential equations.
pub fn ch_residual(ctx: &BlockContext, theta: &[f64], c: &[f64], mu: &[f64]) -> Result<Vec<f64>, Error> {
    let mesh = ctx.mesh();
    let mat = &ctx.problem.material;
    let regp = &ctx.problem.params.regularization;
    let lag = ctx.lagged;
    let tau = ctx.tau;
    let pc = ctx.plap().residual(mesh, c);
    let amu = weighted_stiffness_action(mesh, &lag.mobility, mu);
    let mut fw_q = vec![0.0; lag.mobility.len()];
    for e in 0..mesh.n_elems {
        for q in 0..mesh.nen {
            let eq = e * mesh.nen + q;
            let cq = mesh.interp(c, e, q);
            let g = regp.w_omega_derivatives(&mat.elastic, cq, &lag.strain[eq], lag.z_old[eq]);
            fw_q[eq] = g.w_c + lag.l1[eq] * (cq - lag.c_old[eq]);
        }
    }
    let fw = quad_load(mesh, &fw_q);
    let pmu = if ctx.reg.nu > 0.0 { Some(ctx.nu_power().residual(mesh, mu)) } else { None };
    let t = ctx.truncated(theta);
    let c_old = &ctx.prev.c;
    let mut r = vec![0.0; 2 * mesh.n_nodes];
    for i in 0..mesh.n_nodes {
        let m = mesh.lumped[i];
        let dc = (c[i] - c_old[i]) / tau;
        let mut r1 = m * dc + amu[i];
        if let Some(p) = &pmu {
            r1 += ctx.reg.nu * (p[i] + m * mu[i]);
        }
        let drive = mat.potential.splitting_drive(c[i], c_old[i], regp)?;
        let (pen, _) = ctx.penalty(c[i]);
        r[2 * i] = r1;
        r[2 * i + 1] = m * mu[i] - pc[i] - m * (drive - t[i] + dc + pen) - fw[i];
    }
    Ok(r)
}

fn ch_jacobian(ctx: &BlockContext, c: &[f64], mu: &[f64]) -> Result<BandMatrix, Error> {
    let mesh = ctx.mesh();
    let mat = &ctx.problem.material;
    let regp = &ctx.problem.params.regularization;
    let lag = ctx.lagged;
    let n = mesh.n_nodes;
    let kb = 2 * mesh.node_bandwidth() + 1;
    let mut jm = BandMatrix::new(2 * n, kb, kb);
    for i in 0..n {
        let m = mesh.lumped[i];
        let dd = mat.potential.splitting_drive_prime(c[i], regp)?;
        let (_, dpen) = ctx.penalty(c[i]);
        jm.add(2 * i, 2 * i, m / ctx.tau);
        jm.add(2 * i + 1, 2 * i + 1, m);
        jm.add(2 * i + 1, 2 * i, -m * (dd + 1.0 / ctx.tau + dpen));
        if ctx.reg.nu > 0.0 {
            jm.add(2 * i, 2 * i + 1, ctx.reg.nu * m);
        }
    }
    weighted_stiffness(mesh, &lag.mobility, &mut Block::new(&mut jm, 2, 0, 2, 1, 1.0));
    if ctx.reg.nu > 0.0 {
        ctx.nu_power().jacobian(mesh, mu, &mut Block::new(&mut jm, 2, 0, 2, 1, ctx.reg.nu));
    }
    ctx.plap().jacobian(mesh, c, &mut Block::new(&mut jm, 2, 1, 2, 0, -1.0));
    let mut wcc = vec![0.0; lag.mobility.len()];
    for e in 0..mesh.n_elems {
        for q in 0..mesh.nen {
            let eq = e * mesh.nen + q;
            let cq = mesh.interp(c, e, q);
            wcc[eq] = regp.w_omega_derivatives(&mat.elastic, cq, &lag.strain[eq], lag.z_old[eq]).w_cc + lag.l1[eq];
        }
    }
    quad_mass(mesh, &wcc, &mut Block::new(&mut jm, 2, 1, 2, 0, -1.0));
    Ok(jm)
}

/// Newton solve of the Cahn-Hilliard pair for a fixed temperature guess.
pub fn solve_ch_block(
    ctx: &BlockContext,
    theta: &[f64],
    c0: &[f64],
    mu0: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, NewtonStats), Error> {
    let n = ctx.mesh().n_nodes;
    let x0: Vec<f64> = (0..n).flat_map(|i| [c0[i], mu0[i]]).collect();
    let w = interleave_weights(&ctx.mesh().lumped, 2);
    let split = |x: &[f64]| -> (Vec<f64>, Vec<f64>) {
        ((0..n).map(|i| x[2 * i]).collect(), (0..n).map(|i| x[2 * i + 1]).collect())
    };
    let s = &ctx.problem.params.solver;
    let (x, stats) = newton(
        "cahn-hilliard",
        x0,
        &w,
        s.newton_tol,
        s.max_newton,
        |x| {
            let (c, mu) = split(x);
            ch_residual(ctx, theta, &c, &mu)
        },
        |x, r| {
            let (c, mu) = split(x);
            let jm = ch_jacobian(ctx, &c, &mu)?;
            let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            band_solve(jm, &rhs)
        },
    )?;
    let (c, mu) = split(&x);
    Ok((c, mu, stats))
}

// ---------------------------------------------------------------------------------------------
// Damage

/// Nodal load of the split elastic drive `W_z(c, eps_old, z) + L3 (z - z_old)`.
pub(crate) fn damage_w_load(ctx: &BlockContext, c: &[f64], z: &[f64]) -> Vec<f64> {
    let mesh = ctx.mesh();
    let mat = &ctx.problem.material;
    let regp = &ctx.problem.params.regularization;
    let lag = ctx.lagged;
    let mut fw_q = vec![0.0; lag.mobility.len()];
    for e in 0..mesh.n_elems {
        for q in 0..mesh.nen {
            let eq = e * mesh.nen + q;
            let cq = mesh.interp(c, e, q);
            let zq = mesh.interp(z, e, q);
            let eps = &lag.strain[eq];
            let l3 = regp.l3_bound(&mat.elastic, cq, eps);
            fw_q[eq] = regp.w_omega_derivatives(&mat.elastic, cq, eps, zq).w_z + l3 * (zq - lag.z_old[eq]);
        }
    }
    quad_load(mesh, &fw_q)
}

/// Damage residual without the obstacle multiplier.
pub fn damage_residual(ctx: &BlockContext, c: &[f64], theta: &[f64], z: &[f64]) -> Vec<f64> {
    let mesh = ctx.mesh();
    let mat = &ctx.problem.material;
    let pz = ctx.plap().residual(mesh, z);
    let fw = damage_w_load(ctx, c, z);
    let t = ctx.truncated(theta);
    let z_old = &ctx.prev.z;
    (0..mesh.n_nodes)
        .map(|i| {
            let m = mesh.lumped[i];
            let (pen, _) = ctx.penalty(z[i]);
            m * (z[i] - z_old[i]) / ctx.tau
                + pz[i]
                + m * (mat.sigma.splitting_drive(z[i], z_old[i]) + pen - t[i])
                + fw[i]
        })
        .collect()
}

fn damage_jacobian(ctx: &BlockContext, c: &[f64], z: &[f64]) -> BandMatrix {
    let mesh = ctx.mesh();
    let mat = &ctx.problem.material;
    let regp = &ctx.problem.params.regularization;
    let lag = ctx.lagged;
    let bw = mesh.node_bandwidth();
    let mut jm = BandMatrix::new(mesh.n_nodes, bw, bw);
    for i in 0..mesh.n_nodes {
        let (_, dpen) = ctx.penalty(z[i]);
        let s2 = mat.sigma.second(z[i]) + mat.sigma.l_sigma;
        jm.add(i, i, mesh.lumped[i] * (1.0 / ctx.tau + s2 + dpen));
    }
    ctx.plap().jacobian(mesh, z, &mut jm);
    let mut wzz = vec![0.0; lag.mobility.len()];
    for e in 0..mesh.n_elems {
        for q in 0..mesh.nen {
            let eq = e * mesh.nen + q;
            let cq = mesh.interp(c, e, q);
            let zq = mesh.interp(z, e, q);
            let eps = &lag.strain[eq];
            wzz[eq] = regp.w_omega_derivatives(&mat.elastic, cq, eps, zq).w_zz + regp.l3_bound(&mat.elastic, cq, eps);
        }
    }
    quad_mass(mesh, &wzz, &mut jm);
    jm
}

/// Output of the obstacle solve.
#[derive(Debug, Clone)]
pub struct DamageSolution {
    pub z: Vec<f64>,
    /// Multiplier of the constraint `0 <= z <= z_old`.
    pub xi: Vec<f64>,
    pub iterations: usize,
    /// Scaled residual on inactive nodes.
    pub residual: f64,
    pub active_upper: usize,
    pub active_lower: usize,
    /// `max_i |xi_i| dist(z_i, bound) / m_i`.
    pub gap: f64,
    /// Largest scaled multiplier of the wrong sign.
    pub sign_violation: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Set {
    Free,
    Upper,
    Lower,
}

/// Multiplier, gap and sign check of a candidate damage field.
pub(crate) fn damage_consistency(ctx: &BlockContext, c: &[f64], theta: &[f64], z: &[f64]) -> (f64, f64, f64, Vec<f64>) {
    let mesh = ctx.mesh();
    let f = damage_residual(ctx, c, theta, z);
    let z_old = &ctx.prev.z;
    let mut free = 0.0f64;
    let mut gap = 0.0f64;
    let mut sign = 0.0f64;
    let mut xi = vec![0.0; mesh.n_nodes];
    for i in 0..mesh.n_nodes {
        let m = mesh.lumped[i];
        let at_hi = z[i] == z_old[i];
        let at_lo = z[i] == 0.0;
        if at_hi && at_lo {
            xi[i] = -f[i];
        } else if at_hi {
            xi[i] = -f[i];
            sign = sign.max(f[i] / m);
        } else if at_lo {
            xi[i] = -f[i];
            sign = sign.max(-f[i] / m);
        } else {
            free = free.max((f[i] / m).abs());
            let dist = z[i].min(z_old[i] - z[i]).max(0.0);
            gap = gap.max(f[i].abs() * dist / m);
        }
    }
    (free, gap, sign.max(0.0), xi)
}

/// Incremental functional whose gradient is [`damage_residual`].
pub(crate) fn damage_objective(ctx: &BlockContext, c: &[f64], theta: &[f64], z: &[f64]) -> f64 {
    let mesh = ctx.mesh();
    let mat = &ctx.problem.material;
    let regp = &ctx.problem.params.regularization;
    let lag = ctx.lagged;
    let z_old = &ctx.prev.z;
    let mut j = ctx.plap().energy(mesh, z);
    for i in 0..mesh.n_nodes {
        let dz = z[i] - z_old[i];
        let mut v = dz * dz / (2.0 * ctx.tau) + mat.sigma.value(z[i]) + 0.5 * mat.sigma.l_sigma * dz * dz
            - ctx.heat.t_m(theta[i]) * z[i];
        if ctx.reg.nu > 0.0 {
            v += ctx.reg.nu * z[i].abs().powf(ctx.reg.varrho) / ctx.reg.varrho;
        }
        j += mesh.lumped[i] * v;
    }
    for e in 0..mesh.n_elems {
        for q in 0..mesh.nen {
            let eq = e * mesh.nen + q;
            let cq = mesh.interp(c, e, q);
            let zq = mesh.interp(z, e, q);
            let eps = &lag.strain[eq];
            let l3 = regp.l3_bound(&mat.elastic, cq, eps);
            j += mesh.quad.weight * (regp.w_omega(&mat.elastic, cq, eps, zq) + 0.5 * l3 * (zq - lag.z_old[eq]).powi(2));
        }
    }
    j
}

fn damage_solution(ctx: &BlockContext, c: &[f64], theta: &[f64], z: Vec<f64>, iterations: usize) -> Option<DamageSolution> {
    let s = &ctx.problem.params.solver;
    let z_old = &ctx.prev.z;
    let feasible = z.iter().zip(z_old).all(|(&a, &b)| a >= 0.0 && a <= b);
    let (free, gap, sign, xi) = damage_consistency(ctx, c, theta, &z);
    if !(feasible && free <= s.newton_tol && sign <= s.newton_tol) {
        return None;
    }
    let active_upper = z.iter().zip(z_old).filter(|(a, b)| a == b).count();
    let active_lower = z.iter().zip(z_old).filter(|(&a, &b)| a == 0.0 && b > 0.0).count();
    Some(DamageSolution { z, xi, iterations, residual: free, active_upper, active_lower, gap, sign_violation: sign })
}

/// Primal-dual active set solve of the damage obstacle problem on `[0, z_old]`.
///
/// Strong gradient coupling can make the active sets cycle; a repeated set pattern hands over to a
/// projected Newton method with an Armijo search on the (convex) incremental functional.
pub fn solve_damage_block(ctx: &BlockContext, c: &[f64], theta: &[f64], z0: &[f64]) -> Result<DamageSolution, Error> {
    let mesh = ctx.mesh();
    let n = mesh.n_nodes;
    let z_old = &ctx.prev.z;
    let s = &ctx.problem.params.solver;
    let mut z: Vec<f64> = (0..n).map(|i| z0[i].clamp(0.0, z_old[i])).collect();
    let start = z.clone();
    let mut xi: Vec<f64> = damage_residual(ctx, c, theta, &z).iter().map(|v| -v).collect();
    let mut sets = vec![Set::Free; n];
    let mut seen: Vec<Vec<Set>> = Vec::new();
    for it in 1..=s.max_active_set {
        let f = damage_residual(ctx, c, theta, &z);
        for i in 0..n {
            let cst = mesh.lumped[i] / ctx.tau;
            sets[i] = if z_old[i] <= 0.0 || xi[i] + cst * (z[i] - z_old[i]) > 0.0 {
                Set::Upper
            } else if xi[i] + cst * z[i] < 0.0 {
                Set::Lower
            } else {
                Set::Free
            };
        }
        // a settled pattern is normal while Newton converges; returning to an older one is a cycle
        if seen.last() != Some(&sets) {
            if seen.contains(&sets) {
                return projected_newton(ctx, c, theta, start, it);
            }
            seen.push(sets.clone());
        }
        let jm = damage_jacobian(ctx, c, &z);
        let mut jr = jm.clone();
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            match sets[i] {
                Set::Free => rhs[i] = -f[i],
                Set::Upper => {
                    jr.set_identity_row(i);
                    rhs[i] = z_old[i] - z[i];
                }
                Set::Lower => {
                    jr.set_identity_row(i);
                    rhs[i] = -z[i];
                }
            }
        }
        let dz = band_solve(jr, &rhs)?;
        let jdz = jm.matvec(&dz);
        for i in 0..n {
            match sets[i] {
                Set::Free => {
                    z[i] += dz[i];
                    xi[i] = 0.0;
                }
                Set::Upper => {
                    z[i] = z_old[i];
                    xi[i] = -(f[i] + jdz[i]);
                }
                Set::Lower => {
                    z[i] = 0.0;
                    xi[i] = -(f[i] + jdz[i]);
                }
            }
        }
        if let Some(sol) = damage_solution(ctx, c, theta, z.clone(), it) {
            return Ok(sol);
        }
    }
    projected_newton(ctx, c, theta, start, s.max_active_set)
}

/// Projected Newton iteration on `[0, z_old]`, started from a feasible point.
fn projected_newton(ctx: &BlockContext, c: &[f64], theta: &[f64], mut z: Vec<f64>, spent: usize) -> Result<DamageSolution, Error> {
    let mesh = ctx.mesh();
    let n = mesh.n_nodes;
    let z_old = &ctx.prev.z;
    let s = &ctx.problem.params.solver;
    let project = |v: Vec<f64>| -> Vec<f64> { v.iter().zip(z_old).map(|(&a, &b)| a.clamp(0.0, b)).collect() };
    let mut j = damage_objective(ctx, c, theta, &z);
    for it in 1..=s.max_active_set {
        if let Some(sol) = damage_solution(ctx, c, theta, z.clone(), spent + it) {
            return Ok(sol);
        }
        let f = damage_residual(ctx, c, theta, &z);
        // binding: at a bound and pushed against it, within the size of a projected gradient step
        let width: f64 = (0..n)
            .map(|i| (z[i] - (z[i] - ctx.tau * f[i] / mesh.lumped[i]).clamp(0.0, z_old[i])).abs())
            .fold(0.0, f64::max)
            .min(1e-3);
        let mut jr = damage_jacobian(ctx, c, &z);
        let mut rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        for i in 0..n {
            let upper = z_old[i] <= 0.0 || (z[i] >= z_old[i] - width && f[i] < 0.0);
            let lower = z[i] <= width && f[i] > 0.0;
            // binding nodes are moved onto their bound
            if upper || lower {
                jr.set_identity_row(i);
                rhs[i] = if upper { z_old[i] - z[i] } else { -z[i] };
            }
        }
        let dz = band_solve(jr, &rhs)?;
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = project(z.iter().zip(&dz).map(|(a, d)| a + step * d).collect());
            let decrease: f64 = f.iter().zip(trial.iter().zip(&z)).map(|(g, (a, b))| g * (a - b)).sum();
            let jt = damage_objective(ctx, c, theta, &trial);
            if jt <= j + 1e-4 * decrease + 4.0 * f64::EPSILON * j.abs() {
                accepted = Some((trial, jt));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((trial, jt)) if trial != z => {
                z = trial;
                j = jt;
            }
            _ => break,
        }
    }
    damage_solution(ctx, c, theta, z, spent + s.max_active_set)
        .ok_or(Error::ActiveSetCycling { iterations: spent + s.max_active_set })
}

// ---------------------------------------------------------------------------------------------
// Momentum

struct MomentumCoefficients {
    b: Vec<f64>,
    /// `b C eps*(R(c))` at quadrature points.
    eigen_stress: Vec<Sym>,
    /// Interpolated `T_M(theta)`.
    temp: Vec<f64>,
}

fn momentum_coefficients(ctx: &BlockContext, c: &[f64], z: &[f64], theta: &[f64]) -> MomentumCoefficients {
    let mesh = ctx.mesh();
    let el = &ctx.problem.material.elastic;
    let regp = &ctx.problem.params.regularization;
    let t = ctx.truncated(theta);
    let nq = mesh.n_elems * mesh.nen;
    let mut out = MomentumCoefficients { b: Vec::with_capacity(nq), eigen_stress: Vec::with_capacity(nq), temp: Vec::with_capacity(nq) };
    for e in 0..mesh.n_elems {
        for q in 0..mesh.nen {
            let r = regp.truncate(mesh.interp(c, e, q)).0;
            let b = el.b.eval(r, mesh.interp(z, e, q));
            out.b.push(b);
            out.eigen_stress.push(b * el.apply_c(&el.eigenstrain_tensor(r, mesh.dim)));
            out.temp.push(mesh.interp(&t, e, q));
        }
    }
    out
}

fn momentum_residual_with(ctx: &BlockContext, co: &MomentumCoefficients, u: &[f64]) -> Vec<f64> {
    let mesh = ctx.mesh();
    let d = mesh.dim;
    let el = &ctx.problem.material.elastic;
    let rho = ctx.problem.material.heat.rho;
    let lag = ctx.lagged;
    let prev = ctx.prev;
    let tau = ctx.tau;
    let du: Vec<f64> = u.iter().zip(&prev.u).map(|(a, b)| (a - b) / tau).collect();
    let pen: Option<Vec<f64>> = if ctx.reg.nu > 0.0 { Some(u.iter().zip(&ctx.data.u_d).map(|(a, b)| a - b).collect()) } else { None };
    let pw = ctx.nu_power();
    let mut stress = Vec::with_capacity(co.b.len());
    for e in 0..mesh.n_elems {
        for q in 0..mesh.nen {
            let eq = e * mesh.nen + q;
            let rate = mesh.strain(&du, e, q);
            let eps = mesh.strain(u, e, q);
            let mut s = lag.viscosity[eq] * el.apply_c(&rate) + co.b[eq] * el.apply_c(&eps) - co.eigen_stress[eq]
                - Sym::scalar(d, rho * co.temp[eq]);
            if let Some(p) = &pen {
                let ep = mesh.strain(p, e, q);
                s = s + (ctx.reg.nu * pw.flux_factor(ep.ddot(&ep))) * ep;
            }
            stress.push(s);
        }
    }
    let mut r = stress_residual(mesh, &stress);
    for i in 0..mesh.n_nodes {
        let m = mesh.lumped[i];
        for k in 0..d {
            let j = d * i + k;
            r[j] += m * ((u[j] - prev.u[j]) / tau - prev.v[j]) / tau - m * ctx.data.f[j];
        }
    }
    r
}

/// Full momentum residual, including the rows of Dirichlet nodes (their values are the reactions).
pub fn momentum_residual(ctx: &BlockContext, c: &[f64], z: &[f64], theta: &[f64], u: &[f64]) -> Vec<f64> {
    let co = momentum_coefficients(ctx, c, z, theta);
    momentum_residual_with(ctx, &co, u)
}

fn momentum_jacobian(ctx: &BlockContext, co: &MomentumCoefficients, u: &[f64]) -> BandMatrix {
    let mesh = ctx.mesh();
    let d = mesh.dim;
    let el = &ctx.problem.material.elastic;
    let kb = d * (mesh.node_bandwidth() + 1) - 1;
    let mut jm = BandMatrix::new(d * mesh.n_nodes, kb, kb);
    let t2 = ctx.tau * ctx.tau;
    for i in 0..mesh.n_nodes {
        for k in 0..d {
            jm.add(d * i + k, d * i + k, mesh.lumped[i] / t2);
        }
    }
    let coef: Vec<f64> = ctx.lagged.viscosity.iter().zip(&co.b).map(|(a, b)| a / ctx.tau + b).collect();
    isotropic_stiffness(mesh, el.lame_lambda, el.lame_mu, &coef, &mut jm);
    if ctx.reg.nu > 0.0 {
        let p: Vec<f64> = u.iter().zip(&ctx.data.u_d).map(|(a, b)| a - b).collect();
        nu_strain_jacobian(ctx, &p, &mut jm);
    }
    jm
}

/// Jacobian of `nu |E|^{varrho-2} E : eps(w)` with `E = eps(u - u_D)`.
fn nu_strain_jacobian<A: Assemble>(ctx: &BlockContext, p: &[f64], out: &mut A) {
    let mesh = ctx.mesh();
    let d = mesh.dim;
    let pw = ctx.nu_power();
    for e in 0..mesh.n_elems {
        let nodes = mesh.nodes(e);
        for q in 0..mesh.nen {
            let ep = mesh.strain(p, e, q);
            let e2 = ep.ddot(&ep);
            let w = mesh.quad.weight * ctx.reg.nu;
            let f = pw.flux_factor(e2);
            let fp = 2.0 * pw.flux_factor_prime(e2);
            let g = &mesh.quad.grads[q];
            for (a, &i) in nodes.iter().enumerate() {
                for k in 0..d {
                    let ea: f64 = (0..d).map(|j| ep.m[k][j] * g[a][j]).sum();
                    for (b, &jn) in nodes.iter().enumerate() {
                        let dot: f64 = (0..d).map(|m| g[a][m] * g[b][m]).sum();
                        for l in 0..d {
                            let eb: f64 = (0..d).map(|j| ep.m[l][j] * g[b][j]).sum();
                            let mut sym = 0.5 * g[a][l] * g[b][k];
                            if k == l {
                                sym += 0.5 * dot;
                            }
                            out.add(d * i + k, d * jn + l, w * (f * sym + fp * ea * eb));
                        }
                    }
                }
            }
        }
    }
}

/// Momentum solve with the boundary displacement fixed to `u_D(t^k)`.
pub fn solve_momentum_block(
    ctx: &BlockContext,
    c: &[f64],
    z: &[f64],
    theta: &[f64],
    u0: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, NewtonStats), Error> {
    let mesh = ctx.mesh();
    let d = mesh.dim;
    let co = momentum_coefficients(ctx, c, z, theta);
    let mut u = u0.to_vec();
    let mut fixed = vec![false; d * mesh.n_nodes];
    for i in mesh.boundary_nodes() {
        for k in 0..d {
            u[d * i + k] = ctx.data.u_d[d * i + k];
            fixed[d * i + k] = true;
        }
    }
    let w = ctx.momentum_weights();
    let s = &ctx.problem.params.solver;
    let (u, stats) = newton(
        "momentum",
        u,
        &w,
        s.newton_tol,
        s.max_newton,
        |u| {
            let mut r = momentum_residual_with(ctx, &co, u);
            for (j, &f) in fixed.iter().enumerate() {
                if f {
                    r[j] = 0.0;
                }
            }
            Ok(r)
        },
        |u, r| {
            let mut jm = momentum_jacobian(ctx, &co, u);
            let mut rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            for (j, &f) in fixed.iter().enumerate() {
                if f {
                    jm.set_identity_row(j);
                    rhs[j] = 0.0;
                }
            }
            // pivoting may leave roundoff on the identity rows; the trace must stay exact
            let mut dx = band_solve(jm, &rhs)?;
            for (j, &f) in fixed.iter().enumerate() {
                if f {
                    dx[j] = 0.0;
                }
            }
            Ok(dx)
        },
    )?;
    let v = super::d_tau(&u, &ctx.prev.u, ctx.tau);
    Ok((u, v, stats))
}

// ---------------------------------------------------------------------------------------------
// Temperature

/// Fields-dependent parts of the temperature equation.
pub(crate) struct TemperatureTerms {
    /// `m_i (D c_i + D z_i) + rho B_i`.
    pub coef: Vec<f64>,
    /// `m_i g_i + m_i (D c_i^2 + D z_i^2) + S^mu_i + S^v_i`.
    pub source: Vec<f64>,
}

pub(crate) fn temperature_terms(ctx: &BlockContext, c: &[f64], mu: &[f64], z: &[f64], v: &[f64]) -> TemperatureTerms {
    let mesh = ctx.mesh();
    let el = &ctx.problem.material.elastic;
    let rho = ctx.problem.material.heat.rho;
    let lag = ctx.lagged;
    let nq = mesh.n_elems * mesh.nen;
    let mut smu = vec![0.0; nq];
    let mut sv = vec![0.0; nq];
    for e in 0..mesh.n_elems {
        for q in 0..mesh.nen {
            let eq = e * mesh.nen + q;
            let g = mesh.grad(mu, e, q);
            smu[eq] = lag.mobility[eq] * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
            let ev = mesh.strain(v, e, q);
            sv[eq] = lag.viscosity[eq] * el.apply_c(&ev).ddot(&ev);
        }
    }
    let smu = quad_load(mesh, &smu);
    let sv = quad_load(mesh, &sv);
    let b = div_moments(mesh, v);
    let prev = ctx.prev;
    let mut coef = vec![0.0; mesh.n_nodes];
    let mut source = vec![0.0; mesh.n_nodes];
    for i in 0..mesh.n_nodes {
        let m = mesh.lumped[i];
        let dc = (c[i] - prev.c[i]) / ctx.tau;
        let dz = (z[i] - prev.z[i]) / ctx.tau;
        coef[i] = m * (dc + dz) + rho * b[i];
        source[i] = m * ctx.data.g[i] + m * (dc * dc + dz * dz) + smu[i] + sv[i];
    }
    TemperatureTerms { coef, source }
}

fn temperature_residual_with(ctx: &BlockContext, tt: &TemperatureTerms, theta: &[f64]) -> Result<Vec<f64>, Error> {
    let mesh = ctx.mesh();
    if let Some(i) = theta.iter().position(|&t| !(t > 0.0)) {
        return Err(Error::PositivityLoss { node: i, value: theta[i] });
    }
    let (k, _) = element_conductivity(mesh, theta, &ctx.heat);
    let a = heat_diffusion_action(mesh, theta, &k);
    let prev = ctx.prev;
    Ok((0..mesh.n_nodes)
        .map(|i| {
            mesh.lumped[i] * (theta[i] - prev.theta[i]) / ctx.tau + a[i] - ctx.data.hload[i]
                + tt.coef[i] * ctx.heat.t_m(theta[i])
                - tt.source[i]
        })
        .collect())
}

/// Residual of the temperature equation for given mechanical and phase fields.
pub fn temperature_residual(
    ctx: &BlockContext,
    c: &[f64],
    mu: &[f64],
    z: &[f64],
    v: &[f64],
    theta: &[f64],
) -> Result<Vec<f64>, Error> {
    let tt = temperature_terms(ctx, c, mu, z, v);
    temperature_residual_with(ctx, &tt, theta)
}

/// Positivity-preserving damped Newton solve of the temperature equation.
pub fn solve_temperature_block(
    ctx: &BlockContext,
    c: &[f64],
    mu: &[f64],
    z: &[f64],
    v: &[f64],
    theta0: &[f64],
) -> Result<(Vec<f64>, NewtonStats), Error> {
    let mesh = ctx.mesh();
    let tt = temperature_terms(ctx, c, mu, z, v);
    for i in 0..mesh.n_nodes {
        let diag = mesh.lumped[i] / ctx.tau + tt.coef[i];
        if !(diag > 0.0) {
            return Err(Error::PositivityLoss { node: i, value: diag });
        }
    }
    let s = &ctx.problem.params.solver;
    // residual measured as a temperature increment relative to the current temperature level
    let level = ctx.prev.theta.iter().fold(1.0f64, |m, &t| m.max(t)) / ctx.tau;
    let w: Vec<f64> = mesh.lumped.iter().map(|m| m * level).collect();
    let start: Vec<f64> = theta0.iter().zip(&ctx.prev.theta).map(|(&a, &b)| if a > 0.0 { a } else { b }).collect();
    newton(
        "temperature",
        start,
        &w,
        s.newton_tol,
        s.max_newton,
        |th| temperature_residual_with(ctx, &tt, th),
        |th, r| {
            let bw = mesh.node_bandwidth();
            let mut jm = BandMatrix::new(mesh.n_nodes, bw, bw);
            for i in 0..mesh.n_nodes {
                jm.add(i, i, mesh.lumped[i] / ctx.tau + tt.coef[i] * ctx.heat.t_m_prime(th[i]));
            }
            heat_diffusion_jacobian(mesh, th, &ctx.heat, &mut jm);
            let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            band_solve(jm, &rhs)
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepper::init_states;

    #[test]
    fn damage_objective_is_the_primitive_of_the_residual() {
        let setup = crate::io::preset("damage-loading").unwrap().setup().unwrap();
        let p = &setup.problem;
        let (mut prev, _) = init_states(p, &setup.initial).unwrap();
        prev.u = (0..prev.u.len()).map(|j| 0.01 * ((j as f64) * 0.7).sin()).collect();
        let lagged = Lagged::new(p, &prev);
        let data = p.step_data(0.0, p.params.tau).unwrap();
        let reg = Regularization { nu: 1e-2, varrho: 6.0, truncation: Some(50.0) };
        let ctx = BlockContext::new(p, &prev, &lagged, &data, p.params.tau, reg);
        let z: Vec<f64> = prev.z.iter().enumerate().map(|(i, z)| z * (0.9 + 0.05 * (i as f64).cos())).collect();
        let f = damage_residual(&ctx, &prev.c, &prev.theta, &z);
        let dir: Vec<f64> = (0..z.len()).map(|i| ((i * 7 % 11) as f64 - 5.0) / 5.0).collect();
        let h = 1e-6;
        let shifted = |s: f64| -> Vec<f64> { z.iter().zip(&dir).map(|(a, d)| a + s * d).collect() };
        let fd = (damage_objective(&ctx, &prev.c, &prev.theta, &shifted(h))
            - damage_objective(&ctx, &prev.c, &prev.theta, &shifted(-h)))
            / (2.0 * h);
        let exact: f64 = f.iter().zip(&dir).map(|(a, b)| a * b).sum();
        assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "fd {fd} vs {exact}");
    }
}

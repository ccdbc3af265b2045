//! Five-node block fixtures and grid-search minimizers of their incremental functionals.

#![allow(dead_code)]

use thermophase::grid::{Mesh, MeshSpec};
use thermophase::material::{DamagePotential, MaterialModel};
use thermophase::monitors::{brute_force_minimize, SearchBox};
use thermophase::stepper::*;

const H: f64 = 0.25;
const M: [f64; 5] = [0.125, 0.25, 0.25, 0.25, 0.125];

fn fixture(material: MaterialModel, tau: f64) -> Problem {
    let mesh = Mesh::new(&MeshSpec { dim: 1, extents: vec![1.0], cells: vec![4] }).unwrap();
    let mut params = SchemeParams::for_dim(1);
    params.tau = tau;
    Problem { mesh, material, params, data: DataSampler::default() }
}

fn state(c: [f64; 5], z: [f64; 5], theta: [f64; 5]) -> State {
    State { k: 0, t: 0.0, c: c.to_vec(), mu: vec![0.0; 5], z: z.to_vec(), theta: theta.to_vec(), u: vec![0.0; 5], v: vec![0.0; 5] }
}

/// `sum over cells (x_{i+1} - x_i)^2 / 2h`.
fn dirichlet_energy(x: &[f64]) -> f64 {
    x.windows(2).map(|w| (w[1] - w[0]).powi(2) / (2.0 * H)).sum()
}

pub fn inf_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Block solution and grid-search minimizer of the damage functional with `sigma = alpha (1 - z)`.
pub fn damage_case(alpha: f64, z_old: [f64; 5], theta: [f64; 5]) -> (DamageSolution, Vec<f64>) {
    let material = MaterialModel { sigma: DamagePotential::linear(alpha), ..Default::default() };
    let tau = 0.5;
    let p = fixture(material, tau);
    let prev = state([0.0; 5], z_old, theta);
    let lagged = Lagged::new(&p, &prev);
    let data = p.step_data(0.0, tau).unwrap();
    let ctx = BlockContext::new(&p, &prev, &lagged, &data, tau, Regularization::OFF);
    let sol = solve_damage_block(&ctx, &prev.c, &prev.theta, &prev.z).unwrap();

    // no strain, so only the gradient, the step penalty and the linear drive -alpha - theta remain
    let j = |z: &[f64]| {
        let mut s = dirichlet_energy(z);
        for i in 0..5 {
            s += M[i] * ((z[i] - z_old[i]).powi(2) / (2.0 * tau) - (alpha + theta[i]) * z[i]);
        }
        s
    };
    let bx = SearchBox { lo: vec![0.0; 5], hi: z_old.to_vec(), constrained: vec![true; 5] };
    let oracle = brute_force_minimize(j, &bx, 11, 9).unwrap();
    (sol, oracle)
}

/// Both bounds and the free set are active.
pub fn mixed_damage_case() -> (DamageSolution, Vec<f64>) {
    // a negative alpha drives cool nodes towards full damage while hot ones are held
    damage_case(-8.0, [0.9, 0.5, 0.8, 0.6, 0.2], [0.1, 30.0, 7.0, 8.5, 0.1])
}

/// Plain active-set iteration alternates between two set patterns here.
pub fn cycling_damage_case() -> (DamageSolution, Vec<f64>) {
    damage_case(-2.0, [0.9, 0.5, 0.8, 0.05, 0.7], [0.4, 3.0, 1.0, 0.2, 2.5])
}

/// Moreau envelope of `c^4 / 4` with index `w`, via the real root of `r + w r^3 = c`.
fn quartic_envelope(c: f64, w: f64) -> f64 {
    let p = 1.0 / w;
    let q = -c / w;
    let s = ((q / 2.0).powi(2) + (p / 3.0).powi(3)).sqrt();
    let r = (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt();
    r.powi(4) / 4.0 + (c - r).powi(2) / (2.0 * w)
}

/// Solve `K y = b` for the unit-mobility stiffness on the fixture, pinning `y_0 = 0`.
fn stiffness_solve(b: &[f64]) -> Vec<f64> {
    // drop row and column 0; the rest is tridiagonal
    let n = 4;
    let k = 1.0 / H;
    let mut diag: Vec<f64> = (1..5).map(|i| if i == 4 { k } else { 2.0 * k }).collect();
    let off = -k;
    let mut rhs: Vec<f64> = b[1..].to_vec();
    for i in 1..n {
        let f = off / diag[i - 1];
        diag[i] -= f * off;
        rhs[i] -= f * rhs[i - 1];
    }
    let mut y = vec![0.0; n];
    y[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        y[i] = (rhs[i] - off * y[i + 1]) / diag[i];
    }
    let mut out = vec![0.0];
    out.extend(y);
    out
}

/// Newton solution of the phase block, its grid-search minimizer and the old concentration.
pub fn ch_case() -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    // eliminating mu turns the pair into a mass-constrained minimization with an H^-1 penalty
    let tau = 0.05;
    let p = fixture(MaterialModel::default(), tau);
    let pot = &p.material.potential;
    let w = p.params.regularization.omega;
    let lg = pot.lambda_gamma;
    let c_old = [0.3, -0.2, 0.5, 0.1, -0.4];
    let theta = [1.0, 1.4, 0.8, 1.1, 1.2];
    let prev = state(c_old, [1.0; 5], theta);
    let lagged = Lagged::new(&p, &prev);
    let data = p.step_data(0.0, tau).unwrap();
    let ctx = BlockContext::new(&p, &prev, &lagged, &data, tau, Regularization::OFF);
    let (c, _, _) = solve_ch_block(&ctx, &prev.theta, &prev.c, &prev.mu).unwrap();

    // gamma(c) = 1/4 - c^2 / 2, gamma' = -c
    let full = |y: &[f64]| -> Vec<f64> {
        let mut c = y.to_vec();
        let mass: f64 = (0..4).map(|i| M[i] * (y[i] - c_old[i])).sum();
        c.push(c_old[4] - mass / M[4]);
        c
    };
    let g = |y: &[f64]| {
        let c = full(y);
        let dm: Vec<f64> = (0..5).map(|i| M[i] * (c[i] - c_old[i])).collect();
        let h = stiffness_solve(&dm);
        let mut s = dirichlet_energy(&c) + dm.iter().zip(&h).map(|(a, b)| a * b).sum::<f64>() / (2.0 * tau);
        for i in 0..5 {
            let explicit = -c_old[i] - lg * c_old[i] - theta[i];
            s += M[i]
                * (quartic_envelope(c[i], w) + 0.5 * lg * c[i] * c[i] + explicit * c[i] + (c[i] - c_old[i]).powi(2) / (2.0 * tau));
        }
        s
    };
    let lo: Vec<f64> = c_old[..4].iter().map(|v| v - 0.6).collect();
    let hi: Vec<f64> = c_old[..4].iter().map(|v| v + 0.6).collect();
    let oracle = full(&brute_force_minimize(g, &SearchBox::free(lo, hi), 13, 10).unwrap());
    (c, oracle, c_old.to_vec())
}

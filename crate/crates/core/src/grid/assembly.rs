use super::{shape, Mesh};
use crate::error::Error;
use crate::linalg::{Assemble, SparseMatrix, Triplets};
use crate::material::{ElasticModel, HeatModel, RegularizationParams, Sym};

/// Consistent or row-sum-lumped mass matrix.
pub fn assemble_mass(mesh: &Mesh, lumped: bool) -> SparseMatrix {
    let mut t = Triplets::new(mesh.n_nodes);
    if lumped {
        for (i, &m) in mesh.lumped.iter().enumerate() {
            t.add(i, i, m);
        }
        return t.into_csr();
    }
    quad_mass(mesh, &vec![1.0; mesh.n_elems * mesh.nen], &mut t);
    t.into_csr()
}

/// Standard Laplacian stiffness.
pub fn stiffness_matrix(mesh: &Mesh) -> SparseMatrix {
    let mut t = Triplets::new(mesh.n_nodes);
    for e in 0..mesh.n_elems {
        let nodes = mesh.nodes(e);
        for (a, &i) in nodes.iter().enumerate() {
            for (b, &j) in nodes.iter().enumerate() {
                t.add(i, j, mesh.elem_stiffness[a][b]);
            }
        }
    }
    t.into_csr()
}

/// `sum_q w_q f_q psi_i(x_q)` for values given per element and quadrature point.
pub fn quad_load(mesh: &Mesh, f_q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n_nodes];
    let w = mesh.quad.weight;
    for e in 0..mesh.n_elems {
        for q in 0..mesh.nen {
            let f = w * f_q[e * mesh.nen + q];
            if f == 0.0 {
                continue;
            }
            let n = &mesh.quad.basis[q];
            for (a, &i) in mesh.nodes(e).iter().enumerate() {
                out[i] += f * n[a];
            }
        }
    }
    out
}

/// Weighted mass `sum_q w_q c_q psi_i psi_j`.
pub fn quad_mass<A: Assemble>(mesh: &Mesh, coef_q: &[f64], out: &mut A) {
    let w = mesh.quad.weight;
    for e in 0..mesh.n_elems {
        let nodes = mesh.nodes(e);
        for q in 0..mesh.nen {
            let c = w * coef_q[e * mesh.nen + q];
            if c == 0.0 {
                continue;
            }
            let n = &mesh.quad.basis[q];
            for (a, &i) in nodes.iter().enumerate() {
                for (b, &j) in nodes.iter().enumerate() {
                    out.add(i, j, c * n[a] * n[b]);
                }
            }
        }
    }
}

/// `sum_q w_q c_q grad v . grad psi_i`.
pub fn weighted_stiffness_action(mesh: &Mesh, coef_q: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n_nodes];
    let d = mesh.dim;
    for e in 0..mesh.n_elems {
        for q in 0..mesh.nen {
            let c = mesh.quad.weight * coef_q[e * mesh.nen + q];
            let gv = mesh.grad(v, e, q);
            let g = &mesh.quad.grads[q];
            for (a, &i) in mesh.nodes(e).iter().enumerate() {
                out[i] += c * (0..d).map(|k| gv[k] * g[a][k]).sum::<f64>();
            }
        }
    }
    out
}

/// Matrix of [`weighted_stiffness_action`].
pub fn weighted_stiffness<A: Assemble>(mesh: &Mesh, coef_q: &[f64], out: &mut A) {
    let d = mesh.dim;
    for e in 0..mesh.n_elems {
        let nodes = mesh.nodes(e);
        for q in 0..mesh.nen {
            let c = mesh.quad.weight * coef_q[e * mesh.nen + q];
            let g = &mesh.quad.grads[q];
            for (a, &i) in nodes.iter().enumerate() {
                for (b, &j) in nodes.iter().enumerate() {
                    out.add(i, j, c * (0..d).map(|k| g[a][k] * g[b][k]).sum::<f64>());
                }
            }
        }
    }
}

/// Regularized p-Laplacian with density `((|g|^2 + eps^2)^{p/2} - eps^p) / p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PLaplacian {
    pub p: f64,
    pub eps: f64,
}

impl PLaplacian {
    pub fn density(&self, g2: f64) -> f64 {
        ((g2 + self.eps * self.eps).powf(0.5 * self.p) - self.eps.powf(self.p)) / self.p
    }

    pub fn flux_factor(&self, g2: f64) -> f64 {
        if self.p == 2.0 {
            1.0
        } else {
            (g2 + self.eps * self.eps).powf(0.5 * (self.p - 2.0))
        }
    }

    /// Derivative of the flux factor with respect to `|g|^2`.
    pub fn flux_factor_prime(&self, g2: f64) -> f64 {
        let s = g2 + self.eps * self.eps;
        if self.p == 2.0 || s == 0.0 {
            0.0
        } else {
            0.5 * (self.p - 2.0) * s.powf(0.5 * (self.p - 4.0))
        }
    }

    pub fn energy(&self, mesh: &Mesh, v: &[f64]) -> f64 {
        let mut s = 0.0;
        for e in 0..mesh.n_elems {
            for q in 0..mesh.nen {
                let g = mesh.grad(v, e, q);
                s += mesh.quad.weight * self.density(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
            }
        }
        s
    }

    pub fn residual(&self, mesh: &Mesh, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; mesh.n_nodes];
        let d = mesh.dim;
        for e in 0..mesh.n_elems {
            for q in 0..mesh.nen {
                let gv = mesh.grad(v, e, q);
                let f = mesh.quad.weight * self.flux_factor(gv[0] * gv[0] + gv[1] * gv[1] + gv[2] * gv[2]);
                let g = &mesh.quad.grads[q];
                for (a, &i) in mesh.nodes(e).iter().enumerate() {
                    out[i] += f * (0..d).map(|k| gv[k] * g[a][k]).sum::<f64>();
                }
            }
        }
        out
    }

    pub fn jacobian<A: Assemble>(&self, mesh: &Mesh, v: &[f64], out: &mut A) {
        let d = mesh.dim;
        for e in 0..mesh.n_elems {
            let nodes = mesh.nodes(e);
            for q in 0..mesh.nen {
                let gv = mesh.grad(v, e, q);
                let g2 = gv[0] * gv[0] + gv[1] * gv[1] + gv[2] * gv[2];
                let w = mesh.quad.weight;
                let f = w * self.flux_factor(g2);
                let fp = w * 2.0 * self.flux_factor_prime(g2);
                let g = &mesh.quad.grads[q];
                let mut proj = [0.0; 8];
                for a in 0..nodes.len() {
                    proj[a] = (0..d).map(|k| gv[k] * g[a][k]).sum();
                }
                for (a, &i) in nodes.iter().enumerate() {
                    for (b, &j) in nodes.iter().enumerate() {
                        let lap: f64 = (0..d).map(|k| g[a][k] * g[b][k]).sum();
                        out.add(i, j, f * lap + fp * proj[a] * proj[b]);
                    }
                }
            }
        }
    }

    pub fn jacobian_matrix(&self, mesh: &Mesh, v: &[f64]) -> SparseMatrix {
        let mut t = Triplets::new(mesh.n_nodes);
        self.jacobian(mesh, v, &mut t);
        t.into_csr()
    }
}

/// `sum_q w_q sigma_q : eps(psi_i e_k)` for an interleaved vector test space.
pub fn stress_residual(mesh: &Mesh, stress_q: &[Sym]) -> Vec<f64> {
    let d = mesh.dim;
    let mut out = vec![0.0; d * mesh.n_nodes];
    for e in 0..mesh.n_elems {
        for q in 0..mesh.nen {
            let s = &stress_q[e * mesh.nen + q];
            let g = &mesh.quad.grads[q];
            for (a, &i) in mesh.nodes(e).iter().enumerate() {
                for k in 0..d {
                    out[d * i + k] += mesh.quad.weight * (0..d).map(|j| s.m[k][j] * g[a][j]).sum::<f64>();
                }
            }
        }
    }
    out
}

/// Matrix of `u -> sum_q w_q c_q C eps(u) : eps(psi)` for isotropic `C`.
pub fn isotropic_stiffness<A: Assemble>(mesh: &Mesh, lambda: f64, mu: f64, coef_q: &[f64], out: &mut A) {
    let d = mesh.dim;
    for e in 0..mesh.n_elems {
        let nodes = mesh.nodes(e);
        for q in 0..mesh.nen {
            let c = mesh.quad.weight * coef_q[e * mesh.nen + q];
            if c == 0.0 {
                continue;
            }
            let g = &mesh.quad.grads[q];
            for (a, &i) in nodes.iter().enumerate() {
                for (b, &j) in nodes.iter().enumerate() {
                    let dot: f64 = (0..d).map(|m| g[a][m] * g[b][m]).sum();
                    for k in 0..d {
                        for l in 0..d {
                            let mut v = lambda * g[a][k] * g[b][l] + mu * g[a][l] * g[b][k];
                            if k == l {
                                v += mu * dot;
                            }
                            out.add(d * i + k, d * j + l, c * v);
                        }
                    }
                }
            }
        }
    }
}

/// `B_i = int div(v) psi_i`.
pub fn div_moments(mesh: &Mesh, v: &[f64]) -> Vec<f64> {
    let mut f_q = vec![0.0; mesh.n_elems * mesh.nen];
    for e in 0..mesh.n_elems {
        for q in 0..mesh.nen {
            let g = mesh.vgrad(v, e, q);
            f_q[e * mesh.nen + q] = (0..mesh.dim).map(|k| g[k][k]).sum();
        }
    }
    quad_load(mesh, &f_q)
}

/// `int rho theta div(psi_i e_k)` with `theta` interpolated at quadrature points.
pub fn thermal_div_load(mesh: &Mesh, theta: &[f64], rho: f64) -> Vec<f64> {
    let stress: Vec<Sym> = (0..mesh.n_elems * mesh.nen)
        .map(|eq| Sym::scalar(mesh.dim, rho * mesh.interp(theta, eq / mesh.nen, eq % mesh.nen)))
        .collect();
    stress_residual(mesh, &stress)
}

/// The three forms entering the balance of forces.
#[derive(Debug, Clone)]
pub struct ElasticityForms {
    /// `int a(c, z) V eps(u) : eps(w)`.
    pub viscosity: SparseMatrix,
    /// `int b(R(c), z) C eps(u) : eps(w)`.
    pub stiffness: SparseMatrix,
    /// `int b(R(c), z) C eps*(R(c)) : eps(w)`; the stress form is `stiffness u - eigen_load`.
    pub eigen_load: Vec<f64>,
    /// `int rho theta div(w)`.
    pub thermal_load: Vec<f64>,
}

pub fn elasticity_forms(
    mesh: &Mesh,
    model: &ElasticModel,
    reg: &RegularizationParams,
    a_coef: impl Fn(f64, f64) -> f64,
    c: &[f64],
    z: &[f64],
    theta: &[f64],
    rho: f64,
) -> ElasticityForms {
    let nq = mesh.n_elems * mesh.nen;
    let mut a_q = vec![0.0; nq];
    let mut b_q = vec![0.0; nq];
    let mut eig = Vec::with_capacity(nq);
    for e in 0..mesh.n_elems {
        for q in 0..mesh.nen {
            let cq = mesh.interp(c, e, q);
            let zq = mesh.interp(z, e, q);
            let r = reg.truncate(cq).0;
            a_q[e * mesh.nen + q] = a_coef(cq, zq) * model.viscosity_factor;
            let b = model.b.eval(r, zq);
            b_q[e * mesh.nen + q] = b;
            eig.push(b * model.apply_c(&model.eigenstrain_tensor(r, mesh.dim)));
        }
    }
    let n = mesh.dim * mesh.n_nodes;
    let mut tv = Triplets::new(n);
    isotropic_stiffness(mesh, model.lame_lambda, model.lame_mu, &a_q, &mut tv);
    let mut ts = Triplets::new(n);
    isotropic_stiffness(mesh, model.lame_lambda, model.lame_mu, &b_q, &mut ts);
    ElasticityForms {
        viscosity: tv.into_csr(),
        stiffness: ts.into_csr(),
        eigen_load: stress_residual(mesh, &eig),
        thermal_load: thermal_div_load(mesh, theta, rho),
    }
}

/// Element conductivities `K_M(mean of nodal theta)`.
pub fn element_conductivity(mesh: &Mesh, theta: &[f64], heat: &HeatModel) -> (Vec<f64>, Vec<f64>) {
    let inv = 1.0 / mesh.nen as f64;
    let mut k = Vec::with_capacity(mesh.n_elems);
    let mut kp = Vec::with_capacity(mesh.n_elems);
    for e in 0..mesh.n_elems {
        let mean: f64 = mesh.nodes(e).iter().map(|&i| theta[i]).sum::<f64>() * inv;
        k.push(heat.k_m(mean));
        kp.push(heat.k_m_prime(mean) * inv);
    }
    (k, kp)
}

/// `sum_e K_e S^e theta_e`.
pub fn heat_diffusion_action(mesh: &Mesh, theta: &[f64], k_e: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n_nodes];
    for e in 0..mesh.n_elems {
        let nodes = mesh.nodes(e);
        for (a, &i) in nodes.iter().enumerate() {
            let s: f64 = nodes.iter().enumerate().map(|(b, &j)| mesh.elem_stiffness[a][b] * theta[j]).sum();
            out[i] += k_e[e] * s;
        }
    }
    out
}

/// Jacobian of [`heat_diffusion_action`] with element conductivities depending on the element mean.
pub fn heat_diffusion_jacobian<A: Assemble>(mesh: &Mesh, theta: &[f64], heat: &HeatModel, out: &mut A) {
    let (k, kp) = element_conductivity(mesh, theta, heat);
    for e in 0..mesh.n_elems {
        let nodes = mesh.nodes(e);
        for (a, &i) in nodes.iter().enumerate() {
            let s: f64 = nodes.iter().enumerate().map(|(b, &j)| mesh.elem_stiffness[a][b] * theta[j]).sum();
            for (b, &j) in nodes.iter().enumerate() {
                out.add(i, j, k[e] * mesh.elem_stiffness[a][b] + kp[e] * s);
            }
        }
    }
}

/// Diffusion residual `int K(theta) grad theta . grad psi_i - int_boundary h psi_i` and its Jacobian.
pub fn heat_diffusion_residual(
    mesh: &Mesh,
    theta: &[f64],
    heat: &HeatModel,
    hload: &[f64],
) -> Result<(Vec<f64>, SparseMatrix), Error> {
    for e in 0..mesh.n_elems {
        for q in 0..mesh.nen {
            let v = mesh.interp(theta, e, q);
            if !(v > 0.0) {
                return Err(Error::NonpositiveTemperature { element: e, value: v });
            }
        }
    }
    let (k, _) = element_conductivity(mesh, theta, heat);
    let mut r = heat_diffusion_action(mesh, theta, &k);
    for (ri, hi) in r.iter_mut().zip(hload) {
        *ri -= hi;
    }
    let mut t = Triplets::new(mesh.n_nodes);
    heat_diffusion_jacobian(mesh, theta, heat, &mut t);
    Ok((r, t.into_csr()))
}

/// Trapezoidal boundary load `int_boundary h psi_i`.
pub fn boundary_flux_load(mesh: &Mesh, h: &[f64]) -> Result<Vec<f64>, Error> {
    if let Some(&bad) = h.iter().zip(&mesh.boundary).filter(|(_, &b)| b).map(|(v, _)| v).find(|&&v| v < 0.0) {
        return Err(Error::NegativeBoundarySource(bad));
    }
    Ok(mesh.boundary_mass.iter().zip(h).map(|(w, v)| w * v).collect())
}

impl Mesh {
    pub fn elem_multi_index(&self, e: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        let mut rem = e;
        for k in 0..self.dim {
            idx[k] = rem % self.spec.cells[k];
            rem /= self.spec.cells[k];
        }
        idx
    }
}

/// Boundary integral of `(sigma n) . rate`.
///
/// `stress(e, xi)` is evaluated at face Gauss points from inside the adjacent element, which amounts
/// to a one-sided two-point gradient at the boundary.
pub fn boundary_stress_power(mesh: &Mesh, stress: impl Fn(usize, &[f64; 3]) -> Sym, rate: &[f64]) -> f64 {
    let d = mesh.dim;
    let gauss = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];
    let mut total = 0.0;
    for e in 0..mesh.n_elems {
        let idx = mesh.elem_multi_index(e);
        for k in 0..d {
            for side in 0..2 {
                let on = if side == 0 { idx[k] == 0 } else { idx[k] + 1 == mesh.spec.cells[k] };
                if !on {
                    continue;
                }
                let others: Vec<usize> = (0..d).filter(|&j| j != k).collect();
                let w: f64 = others.iter().map(|&j| 0.5 * mesh.h[j]).product();
                for p in 0..(1usize << others.len()) {
                    let mut xi = [0.0; 3];
                    xi[k] = side as f64;
                    for (t, &j) in others.iter().enumerate() {
                        xi[j] = gauss[(p >> t) & 1];
                    }
                    let (n, _) = shape(d, &mesh.h, &xi);
                    let s = stress(e, &xi);
                    let sign = if side == 0 { -1.0 } else { 1.0 };
                    for (a, &i) in mesh.nodes(e).iter().enumerate() {
                        for c in 0..d {
                            total += w * n[a] * sign * s.m[c][k] * rate[d * i + c];
                        }
                    }
                }
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::MeshSpec;

    fn mesh(d: usize, n: usize) -> Mesh {
        Mesh::new(&MeshSpec { dim: d, extents: vec![1.0; d], cells: vec![n; d] }).unwrap()
    }

    #[test]
    fn lumped_mass_of_two_cells() {
        let m = assemble_mass(&mesh(1, 2), true);
        assert_eq!((m.get(0, 0), m.get(1, 1), m.get(2, 2)), (0.25, 0.5, 0.25));
        let c = assemble_mass(&mesh(2, 3), false);
        assert!((c.vals.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!((c.quadratic_form(&vec![1.0; 16]) - 1.0).abs() < 1e-14);
        assert_eq!(c.row_sums().iter().zip(&mesh(2, 3).lumped).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) < 1e-15, true);
    }

    #[test]
    fn stiffness_annihilates_constants() {
        for d in 1..=3 {
            let m = mesh(d, 3);
            let s = stiffness_matrix(&m);
            assert!(s.matvec(&vec![1.0; m.n_nodes]).iter().all(|v| v.abs() < 1e-12));
            assert!(s.asymmetry() < 1e-15 && s.pattern_is_symmetric());
        }
    }

    #[test]
    fn thermal_divergence_of_shear_free_field() {
        let m = mesh(2, 4);
        let theta = vec![1.0; m.n_nodes];
        let load = thermal_div_load(&m, &theta, 1.0);
        let mut u = vec![0.0; 2 * m.n_nodes];
        for i in 0..m.n_nodes {
            u[2 * i] = m.coords(i)[0];
        }
        let val: f64 = load.iter().zip(&u).map(|(a, b)| a * b).sum();
        assert!((val - 1.0).abs() < 1e-13);
    }

    #[test]
    fn flux_load_rejects_negative_sources() {
        let m = mesh(2, 2);
        let mut h = vec![1.0; m.n_nodes];
        assert!((boundary_flux_load(&m, &h).unwrap().iter().sum::<f64>() - 4.0).abs() < 1e-14);
        h[0] = -1.0;
        assert!(matches!(boundary_flux_load(&m, &h), Err(Error::NegativeBoundarySource(_))));
    }
}

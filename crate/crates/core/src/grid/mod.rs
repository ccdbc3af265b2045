//! Uniform box meshes with multilinear elements and the assembly of every spatial form.

mod assembly;

pub use assembly::*;

use serde::{Deserialize, Serialize};

/// Nodal values of a scalar field.
pub type ScalarField = Vec<f64>;
/// Nodal values of a vector field, interleaved: component `k` of node `i` at `d * i + k`.
pub type VectorField = Vec<f64>;

/// Box `[0, L_0] x ... x [0, L_{d-1}]` split into `cells[k]` equal cells per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub dim: usize,
    pub extents: Vec<f64>,
    pub cells: Vec<usize>,
}

impl MeshSpec {
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !(1..=3).contains(&self.dim) {
            out.push(format!("domain: dim must be 1, 2 or 3 (got {})", self.dim));
            return out;
        }
        if self.extents.len() != self.dim || self.cells.len() != self.dim {
            out.push(format!("domain: extents and cells need exactly {} entries", self.dim));
            return out;
        }
        if self.extents.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            out.push("domain: extents must be positive".into());
        }
        if self.cells.iter().any(|&n| n == 0) {
            out.push("domain: every axis needs at least one cell".into());
        }
        out
    }
}

/// Tensor Gauss rule (two points per axis) with reference basis data.
#[derive(Debug, Clone)]
pub struct Quadrature {
    /// Reference coordinates in `[0, 1]^d`.
    pub points: Vec<[f64; 3]>,
    /// Physical weight (same for all points of the uniform grid).
    pub weight: f64,
    /// `basis[q][a]`.
    pub basis: Vec<[f64; 8]>,
    /// Physical gradients `grads[q][a][k]`.
    pub grads: Vec<[[f64; 3]; 8]>,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub spec: MeshSpec,
    pub dim: usize,
    pub h: [f64; 3],
    pub nodes_per_axis: [usize; 3],
    pub strides: [usize; 3],
    pub n_nodes: usize,
    pub n_elems: usize,
    /// Nodes per element, `2^d`.
    pub nen: usize,
    pub elem_nodes: Vec<[usize; 8]>,
    /// Lumped mass (nodal control volumes).
    pub lumped: Vec<f64>,
    pub boundary: Vec<bool>,
    /// Trapezoidal boundary weights, so that `sum_i w_i h_i` approximates the surface integral of `h`.
    pub boundary_mass: Vec<f64>,
    pub quad: Quadrature,
    /// Element Laplacian `S[a][b]`.
    pub elem_stiffness: [[f64; 8]; 8],
    pub elem_volume: f64,
}

const GAUSS: [f64; 2] = [0.211_324_865_405_187_1, 0.788_675_134_594_812_9];

impl Mesh {
    pub fn new(spec: &MeshSpec) -> crate::Result<Mesh> {
        let errs = spec.validate();
        if !errs.is_empty() {
            return Err(crate::Error::ConfigInvalid(errs));
        }
        let d = spec.dim;
        let mut h = [1.0; 3];
        let mut npa = [1usize; 3];
        let mut cells = [1usize; 3];
        for k in 0..d {
            h[k] = spec.extents[k] / spec.cells[k] as f64;
            npa[k] = spec.cells[k] + 1;
            cells[k] = spec.cells[k];
        }
        let strides = [1, npa[0], npa[0] * npa[1]];
        let n_nodes = npa[0] * npa[1] * npa[2];
        let nen = 1 << d;
        let n_elems: usize = (0..d).map(|k| cells[k]).product();
        let mut elem_nodes = Vec::with_capacity(n_elems);
        for e in 0..n_elems {
            let mut rem = e;
            let mut base = 0;
            for k in 0..d {
                base += (rem % cells[k]) * strides[k];
                rem /= cells[k];
            }
            let mut nodes = [0usize; 8];
            for (a, node) in nodes.iter_mut().enumerate().take(nen) {
                *node = base + (0..d).map(|k| ((a >> k) & 1) * strides[k]).sum::<usize>();
            }
            elem_nodes.push(nodes);
        }
        let elem_volume: f64 = (0..d).map(|k| h[k]).product();
        let w1d = |k: usize, i: usize| if i == 0 || i == spec.cells[k] { 0.5 * h[k] } else { h[k] };
        let mut lumped = vec![0.0; n_nodes];
        let mut boundary = vec![false; n_nodes];
        let mut boundary_mass = vec![0.0; n_nodes];
        for node in 0..n_nodes {
            let idx = Self::split_index(node, &npa);
            lumped[node] = (0..d).map(|k| w1d(k, idx[k])).product();
            for k in 0..d {
                if idx[k] == 0 || idx[k] == spec.cells[k] {
                    boundary[node] = true;
                    boundary_mass[node] += (0..d).filter(|&j| j != k).map(|j| w1d(j, idx[j])).product::<f64>();
                }
            }
        }
        let mut quad = Quadrature { points: Vec::new(), weight: elem_volume / nen as f64, basis: Vec::new(), grads: Vec::new() };
        for q in 0..nen {
            let mut xi = [0.0; 3];
            for k in 0..d {
                xi[k] = GAUSS[(q >> k) & 1];
            }
            let (n, g) = shape(d, &h, &xi);
            quad.points.push(xi);
            quad.basis.push(n);
            quad.grads.push(g);
        }
        let mut elem_stiffness = [[0.0; 8]; 8];
        for q in 0..nen {
            let g = &quad.grads[q];
            for a in 0..nen {
                for b in 0..nen {
                    elem_stiffness[a][b] += quad.weight * (0..d).map(|k| g[a][k] * g[b][k]).sum::<f64>();
                }
            }
        }
        Ok(Mesh {
            spec: spec.clone(),
            dim: d,
            h,
            nodes_per_axis: npa,
            strides,
            n_nodes,
            n_elems,
            nen,
            elem_nodes,
            lumped,
            boundary,
            boundary_mass,
            quad,
            elem_stiffness,
            elem_volume,
        })
    }

    fn split_index(node: usize, npa: &[usize; 3]) -> [usize; 3] {
        [node % npa[0], (node / npa[0]) % npa[1], node / (npa[0] * npa[1])]
    }

    pub fn node_multi_index(&self, node: usize) -> [usize; 3] {
        Self::split_index(node, &self.nodes_per_axis)
    }

    pub fn coords(&self, node: usize) -> [f64; 3] {
        let idx = self.node_multi_index(node);
        let mut x = [0.0; 3];
        for k in 0..self.dim {
            x[k] = idx[k] as f64 * self.h[k];
        }
        x
    }

    /// Physical position of a reference point of element `e`.
    pub fn point(&self, e: usize, xi: &[f64; 3]) -> [f64; 3] {
        let x0 = self.coords(self.elem_nodes[e][0]);
        let mut x = [0.0; 3];
        for k in 0..self.dim {
            x[k] = x0[k] + xi[k] * self.h[k];
        }
        x
    }

    pub fn nodes(&self, e: usize) -> &[usize] {
        &self.elem_nodes[e][..self.nen]
    }

    pub fn volume(&self) -> f64 {
        self.spec.extents.iter().product()
    }

    /// Largest node-index distance inside an element.
    pub fn node_bandwidth(&self) -> usize {
        (0..self.dim).map(|k| self.strides[k]).sum()
    }

    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_nodes).filter(|&i| self.boundary[i])
    }

    /// Value of a nodal field at quadrature point `q` of element `e`.
    #[inline]
    pub fn interp(&self, f: &[f64], e: usize, q: usize) -> f64 {
        let n = &self.quad.basis[q];
        self.nodes(e).iter().enumerate().map(|(a, &i)| n[a] * f[i]).sum()
    }

    #[inline]
    pub fn grad(&self, f: &[f64], e: usize, q: usize) -> [f64; 3] {
        let g = &self.quad.grads[q];
        let mut out = [0.0; 3];
        for (a, &i) in self.nodes(e).iter().enumerate() {
            for k in 0..self.dim {
                out[k] += g[a][k] * f[i];
            }
        }
        out
    }

    /// Gradient `out[i][j] = d u_i / d x_j` of an interleaved vector field.
    #[inline]
    pub fn vgrad(&self, u: &[f64], e: usize, q: usize) -> [[f64; 3]; 3] {
        let d = self.dim;
        let g = &self.quad.grads[q];
        let mut out = [[0.0; 3]; 3];
        for (a, &i) in self.nodes(e).iter().enumerate() {
            for c in 0..d {
                let v = u[d * i + c];
                for k in 0..d {
                    out[c][k] += g[a][k] * v;
                }
            }
        }
        out
    }

    pub fn strain(&self, u: &[f64], e: usize, q: usize) -> crate::material::Sym {
        crate::material::Sym::sym_grad(self.dim, &self.vgrad(u, e, q))
    }

    /// Evaluate a closure at every node.
    pub fn nodal<F: Fn(&[f64; 3]) -> f64>(&self, f: F) -> ScalarField {
        (0..self.n_nodes).map(|i| f(&self.coords(i))).collect()
    }

    /// Lumped integral `sum_i m_i f_i`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.lumped.iter().zip(f).map(|(m, v)| m * v).sum()
    }
}

/// Multilinear basis values and physical gradients at reference point `xi`.
pub fn shape(d: usize, h: &[f64; 3], xi: &[f64; 3]) -> ([f64; 8], [[f64; 3]; 8]) {
    let mut n = [0.0; 8];
    let mut g = [[0.0; 3]; 8];
    for a in 0..(1 << d) {
        let f = |k: usize| if (a >> k) & 1 == 1 { xi[k] } else { 1.0 - xi[k] };
        let df = |k: usize| if (a >> k) & 1 == 1 { 1.0 / h[k] } else { -1.0 / h[k] };
        n[a] = (0..d).map(f).product();
        for k in 0..d {
            g[a][k] = df(k) * (0..d).filter(|&j| j != k).map(f).product::<f64>();
        }
    }
    (n, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(d: usize, n: usize) -> Mesh {
        Mesh::new(&MeshSpec { dim: d, extents: vec![1.0; d], cells: vec![n; d] }).unwrap()
    }

    #[test]
    fn counts_and_volumes() {
        for d in 1..=3 {
            let m = unit(d, 3);
            assert_eq!(m.n_nodes, 4usize.pow(d as u32));
            assert_eq!(m.n_elems, 3usize.pow(d as u32));
            assert!((m.lumped.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!((m.elem_volume * m.n_elems as f64 - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn boundary_measure() {
        assert_eq!(unit(1, 4).boundary_mass.iter().sum::<f64>(), 2.0);
        assert!((unit(2, 5).boundary_mass.iter().sum::<f64>() - 4.0).abs() < 1e-14);
        assert!((unit(3, 2).boundary_mass.iter().sum::<f64>() - 6.0).abs() < 1e-14);
        let m = unit(2, 4);
        assert_eq!(m.boundary.iter().filter(|&&b| b).count(), 16);
    }

    #[test]
    fn quadrature_integrates_bilinear_exactly() {
        let m = unit(2, 3);
        let f = m.nodal(|x| x[0] * x[1]);
        let mut s = 0.0;
        for e in 0..m.n_elems {
            for q in 0..m.nen {
                s += m.quad.weight * m.interp(&f, e, q);
                let g = m.grad(&f, e, q);
                let x = m.point(e, &m.quad.points[q]);
                assert!((g[0] - x[1]).abs() < 1e-12 && (g[1] - x[0]).abs() < 1e-12);
            }
        }
        assert!((s - 0.25).abs() < 1e-14);
    }
}

use std::cell::Cell;

use super::{Problem, State};
use crate::material::Sym;

thread_local! {
    static LAGGED_EVALS: Cell<usize> = const { Cell::new(0) };
}

/// Coefficient evaluations performed while building [`Lagged`] on this thread.
pub fn lagged_evaluations() -> usize {
    LAGGED_EVALS.with(|c| c.get())
}

/// Quadrature-point data frozen at the previous time level.
#[derive(Debug, Clone)]
pub struct Lagged {
    /// `m(c^{k-1}, z^{k-1})`.
    pub mobility: Vec<f64>,
    /// `a(c^{k-1}, z^{k-1})` times the viscosity factor.
    pub viscosity: Vec<f64>,
    /// `eps(u^{k-1})`.
    pub strain: Vec<Sym>,
    pub c_old: Vec<f64>,
    pub z_old: Vec<f64>,
    /// Curvature bound for the concentration split, at `(eps(u^{k-1}), z^{k-1})`.
    pub l1: Vec<f64>,
}

impl Lagged {
    pub fn new(problem: &Problem, prev: &State) -> Lagged {
        let mesh = &problem.mesh;
        let mat = &problem.material;
        let reg = &problem.params.regularization;
        let nq = mesh.n_elems * mesh.nen;
        let mut out = Lagged {
            mobility: Vec::with_capacity(nq),
            viscosity: Vec::with_capacity(nq),
            strain: Vec::with_capacity(nq),
            c_old: Vec::with_capacity(nq),
            z_old: Vec::with_capacity(nq),
            l1: Vec::with_capacity(nq),
        };
        for e in 0..mesh.n_elems {
            for q in 0..mesh.nen {
                let c = mesh.interp(&prev.c, e, q);
                let z = mesh.interp(&prev.z, e, q);
                let eps = mesh.strain(&prev.u, e, q);
                out.mobility.push(mat.mobility(c, z));
                out.viscosity.push(mat.viscosity_coefficient(c, z) * mat.elastic.viscosity_factor);
                out.l1.push(reg.l1_bound(&mat.elastic, &eps, z));
                out.strain.push(eps);
                out.c_old.push(c);
                out.z_old.push(z);
            }
        }
        LAGGED_EVALS.with(|c| c.set(c.get() + 2 * nq));
        out
    }
}

use serde::{Deserialize, Serialize};

use super::poly::{Interval, Poly2};
use super::tensor::Sym;

/// Isotropic elasticity with damage/concentration coupling and Kelvin-Voigt viscosity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElasticModel {
    pub lame_lambda: f64,
    pub lame_mu: f64,
    /// Viscosity tensor is this factor times the elasticity tensor.
    pub viscosity_factor: f64,
    /// Stiffness degradation `b(c, z)`.
    pub b: Poly2,
    /// Viscosity coefficient `a(c, z)`.
    pub a: Poly2,
    /// `eps*(c) = eigenstrain * c * I`.
    pub eigenstrain: f64,
}

impl Default for ElasticModel {
    fn default() -> Self {
        ElasticModel {
            lame_lambda: 1.0,
            lame_mu: 1.0,
            viscosity_factor: 1.0,
            b: Poly2::from_terms(&[(0, 2, 1.0)]),
            a: Poly2::constant(1.0),
            eigenstrain: 0.0,
        }
    }
}

/// Partial derivatives of the elastic density.
#[derive(Debug, Clone, Copy)]
pub struct WDerivatives {
    pub w_c: f64,
    pub w_z: f64,
    pub w_eps: Sym,
    pub w_cc: f64,
    pub w_zz: f64,
    pub w_eps_c: Sym,
    pub w_eps_z: Sym,
}

impl ElasticModel {
    /// `C e = lambda tr(e) I + 2 mu e`.
    pub fn apply_c(&self, e: &Sym) -> Sym {
        self.lame_lambda * e.trace() * Sym::identity(e.d) + (2.0 * self.lame_mu) * *e
    }

    /// `C I : I = d (d lambda + 2 mu)`; `C I = bulk_trace * I` with `bulk_trace = d lambda + 2 mu`.
    pub fn bulk_trace(&self, d: usize) -> f64 {
        d as f64 * self.lame_lambda + 2.0 * self.lame_mu
    }

    pub fn eigenstrain_tensor(&self, c: f64, d: usize) -> Sym {
        Sym::scalar(d, self.eigenstrain * c)
    }

    /// Elastic quadratic form `C(e - eps*(c)) : (e - eps*(c))`.
    pub fn q(&self, c: f64, e: &Sym) -> f64 {
        let r = *e - self.eigenstrain_tensor(c, e.d);
        self.apply_c(&r).ddot(&r)
    }

    pub fn w(&self, c: f64, e: &Sym, z: f64) -> f64 {
        0.5 * self.b.eval(c, z) * self.q(c, e)
    }

    pub fn derivatives(&self, c: f64, e: &Sym, z: f64) -> WDerivatives {
        let d = e.d;
        let alpha = self.eigenstrain;
        let r = *e - self.eigenstrain_tensor(c, d);
        let cr = self.apply_c(&r);
        let q = cr.ddot(&r);
        let tr_cr = cr.trace();
        let bc_poly = self.b.d_c();
        let bz_poly = self.b.d_z();
        let b = self.b.eval(c, z);
        let b_c = bc_poly.eval(c, z);
        let b_z = bz_poly.eval(c, z);
        let b_cc = bc_poly.d_c().eval(c, z);
        let b_zz = bz_poly.d_z().eval(c, z);
        let ci = Sym::scalar(d, self.bulk_trace(d));
        WDerivatives {
            w_c: 0.5 * b_c * q - b * alpha * tr_cr,
            w_z: 0.5 * b_z * q,
            w_eps: b * cr,
            w_cc: 0.5 * b_cc * q - 2.0 * b_c * alpha * tr_cr
                + b * alpha * alpha * d as f64 * self.bulk_trace(d),
            w_zz: 0.5 * b_zz * q,
            w_eps_c: b_c * cr - (b * alpha) * ci,
            w_eps_z: b_z * cr,
        }
    }

    /// Range of `b` over `c` in `cr` and `z` in `[0, 1]`.
    pub fn b_range(&self, cr: Interval) -> Interval {
        self.b.eval_interval(cr, Interval::new(0.0, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elasticity_tensor_is_coercive() {
        let m = ElasticModel { lame_lambda: -0.3, lame_mu: 1.0, ..Default::default() };
        let mut e = Sym::zero(2);
        e.m[0][1] = 1.0;
        e.m[1][0] = 1.0;
        assert!(m.apply_c(&e).ddot(&e) >= 2.0 * m.lame_mu * e.ddot(&e) - 1e-12);
    }

    #[test]
    fn fully_damaged_density_vanishes() {
        let m = ElasticModel::default();
        let e = Sym::diag(2, [0.3, -0.2, 0.0]);
        assert_eq!(m.w(0.4, &e, 0.0), 0.0);
    }
}

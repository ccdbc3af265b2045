use serde::{Deserialize, Serialize};

use super::elastic::{ElasticModel, WDerivatives};
use super::poly::{Interval, Poly1};
use super::tensor::Sym;

/// Yosida index and the smooth truncation used inside the elastic density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegularizationParams {
    pub omega: f64,
    /// Truncation is the identity on `(-M_R, M_R)`.
    pub trunc_halfwidth: f64,
}

impl Default for RegularizationParams {
    fn default() -> Self {
        RegularizationParams { omega: 1e-3, trunc_halfwidth: 10.0 }
    }
}

/// Largest value of `|R''|` for the quintic blend.
pub const TRUNC_CURVATURE: f64 = 1.875;

impl RegularizationParams {
    /// Saturation level of the truncation.
    pub fn trunc_max(&self) -> f64 {
        self.trunc_halfwidth + 0.5
    }

    /// `(R(c), R'(c), R''(c))`. `R'` blends from 1 to 0 by the smoothstep `1 - (10s^3 - 15s^4 + 6s^5)`.
    pub fn truncate(&self, c: f64) -> (f64, f64, f64) {
        let s = c.abs() - self.trunc_halfwidth;
        if s <= 0.0 {
            return (c, 1.0, 0.0);
        }
        let sg = c.signum();
        if s >= 1.0 {
            return (sg * self.trunc_max(), 0.0, 0.0);
        }
        let s2 = s * s;
        let r = self.trunc_halfwidth + s - 2.5 * s2 * s2 + 3.0 * s2 * s2 * s - s2 * s2 * s2;
        let r1 = 1.0 - s2 * s * (10.0 - 15.0 * s + 6.0 * s2);
        let r2 = -30.0 * s2 * (1.0 - s) * (1.0 - s);
        (sg * r, r1, sg * r2)
    }

    pub fn w_omega(&self, m: &ElasticModel, c: f64, e: &Sym, z: f64) -> f64 {
        m.w(self.truncate(c).0, e, z)
    }

    /// Derivatives of `W(R(c), e, z)`.
    pub fn w_omega_derivatives(&self, m: &ElasticModel, c: f64, e: &Sym, z: f64) -> WDerivatives {
        let (r, r1, r2) = self.truncate(c);
        let g = m.derivatives(r, e, z);
        WDerivatives {
            w_c: g.w_c * r1,
            w_z: g.w_z,
            w_eps: g.w_eps,
            w_cc: g.w_cc * r1 * r1 + g.w_c * r2,
            w_zz: g.w_zz,
            w_eps_c: r1 * g.w_eps_c,
            w_eps_z: g.w_eps_z,
        }
    }

    /// Upper bound for `sup_c |W^omega_cc(c, e, z)|`.
    pub fn l1_bound(&self, m: &ElasticModel, e: &Sym, z: f64) -> f64 {
        let d = e.d;
        let alpha = m.eigenstrain;
        let kv = m.bulk_trace(d);
        let rmax = self.trunc_max();
        if m.b.is_z_squared() {
            let zz = z * z;
            return zz * (alpha * alpha * d as f64 * kv
                + TRUNC_CURVATURE * alpha.abs() * kv * (alpha.abs() * d as f64 * rmax + e.trace().abs()));
        }
        self.l1_enclosure(m, e, z)
    }

    /// Interval-arithmetic version of [`Self::l1_bound`], valid for any polynomial `b`.
    pub fn l1_enclosure(&self, m: &ElasticModel, e: &Sym, z: f64) -> f64 {
        let d = e.d;
        let alpha = m.eigenstrain;
        let kv = m.bulk_trace(d);
        let rmax = self.trunc_max();
        // q(r) = C(e - a r I):(e - a r I), t(r) = tr C(e - a r I)
        let ce = m.apply_c(e);
        let q = Poly1::new(vec![ce.ddot(e), -2.0 * alpha * kv * e.trace(), alpha * alpha * d as f64 * kv]);
        let t = Poly1::new(vec![kv * e.trace(), -alpha * kv * d as f64]);
        let zi = Interval::point(z);
        let enclose = |ri: Interval| {
            let b = m.b.eval_interval(ri, zi);
            let bc = m.b.d_c().eval_interval(ri, zi);
            let bcc = m.b.d_c().d_c().eval_interval(ri, zi);
            let qi = q.eval_interval(ri);
            let ti = t.eval_interval(ri);
            let fcc = bcc
                .mul(qi)
                .scale(0.5)
                .add(bc.mul(ti).scale(-2.0 * alpha))
                .add(b.scale(alpha * alpha * d as f64 * kv));
            let fc = bc.mul(qi).scale(0.5).add(b.mul(ti).scale(-alpha));
            (fcc, fc)
        };
        let (fcc, _) = enclose(Interval::new(-rmax, rmax));
        let (_, fc_hi) = enclose(Interval::new(self.trunc_halfwidth, rmax));
        let (_, fc_lo) = enclose(Interval::new(-rmax, -self.trunc_halfwidth));
        fcc.abs_max() + TRUNC_CURVATURE * fc_hi.abs_max().max(fc_lo.abs_max())
    }

    /// `sup_{z in [0,1]} |W^omega_zz(c, e, z)|`.
    pub fn l3_bound(&self, m: &ElasticModel, c: f64, e: &Sym) -> f64 {
        let r = self.truncate(c).0;
        let q = m.q(r, e);
        if m.b.is_z_squared() {
            return q;
        }
        let bzz = m.b.d_z().d_z().eval_interval(Interval::point(r), Interval::new(0.0, 1.0));
        0.5 * bzz.abs_max() * q
    }

    /// Split drives of the elastic density.
    ///
    /// Returns `(drive_c, drive_z, stress)` where the concentration drive is taken at
    /// `(eps_old, z_old)`, the damage drive at `(c_new, eps_old)` and the stress at the new state.
    #[allow(clippy::too_many_arguments)]
    pub fn w_splitting_drives(
        &self,
        m: &ElasticModel,
        c_new: f64,
        c_old: f64,
        z_new: f64,
        z_old: f64,
        eps_old: &Sym,
        eps_new: &Sym,
    ) -> (f64, f64, Sym) {
        let l1 = self.l1_bound(m, eps_old, z_old);
        let drive_c = self.w_omega_derivatives(m, c_new, eps_old, z_old).w_c + l1 * (c_new - c_old);
        let l3 = self.l3_bound(m, c_new, eps_old);
        let drive_z = self.w_omega_derivatives(m, c_new, eps_old, z_new).w_z + l3 * (z_new - z_old);
        let stress = self.w_omega_derivatives(m, c_new, eps_new, z_new).w_eps;
        (drive_c, drive_z, stress)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_is_c2() {
        let reg = RegularizationParams::default();
        let h = 1e-6;
        for i in 0..400 {
            let c = -12.0 + 24.0 * i as f64 / 399.0;
            let (r, r1, r2) = reg.truncate(c);
            let fd1 = (reg.truncate(c + h).0 - reg.truncate(c - h).0) / (2.0 * h);
            let fd2 = (reg.truncate(c + h).1 - reg.truncate(c - h).1) / (2.0 * h);
            assert!((fd1 - r1).abs() < 1e-6);
            assert!((fd2 - r2).abs() < 1e-5);
            assert!(r.abs() <= reg.trunc_max() && r2.abs() <= TRUNC_CURVATURE + 1e-12);
        }
        assert_eq!(reg.truncate(3.0), (3.0, 1.0, 0.0));
    }

    #[test]
    fn bounds_dominate_sampled_curvature() {
        let reg = RegularizationParams { trunc_halfwidth: 2.0, ..Default::default() };
        let m = ElasticModel { eigenstrain: 0.3, ..Default::default() };
        let e = Sym::diag(2, [0.1, -0.3, 0.0]);
        let z = 0.8;
        let closed = reg.l1_bound(&m, &e, z);
        let boxed = reg.l1_enclosure(&m, &e, z);
        assert!(boxed >= closed * (1.0 - 1e-12));
        let mut sampled: f64 = 0.0;
        for i in 0..=4000 {
            let c = -4.0 + 8.0 * i as f64 / 4000.0;
            sampled = sampled.max(reg.w_omega_derivatives(&m, c, &e, z).w_cc.abs());
        }
        assert!(sampled <= closed);
    }
}

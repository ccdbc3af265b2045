//! Constitutive functions: potentials, elastic density, heat conduction and their splittings.

mod damage;
mod elastic;
mod heat;
mod poly;
mod potential;
mod regularization;
mod tensor;

pub use damage::DamagePotential;
pub use elastic::{ElasticModel, WDerivatives};
pub use heat::HeatModel;
pub use poly::{Interval, Poly1, Poly2};
pub use potential::{ConcentrationPotential, PotentialKind};
pub use regularization::{RegularizationParams, TRUNC_CURVATURE};
pub use tensor::Sym;

use std::cell::Cell;

use serde::{Deserialize, Serialize};

thread_local! {
    static COEFFICIENT_EVALS: Cell<usize> = const { Cell::new(0) };
}

/// Number of mobility/viscosity evaluations on this thread so far.
pub fn coefficient_evaluations() -> usize {
    COEFFICIENT_EVALS.with(|c| c.get())
}

fn count_evaluation() {
    COEFFICIENT_EVALS.with(|c| c.set(c.get() + 1));
}

/// The full set of constitutive closures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaterialModel {
    pub potential: ConcentrationPotential,
    pub elastic: ElasticModel,
    pub heat: HeatModel,
    pub sigma: DamagePotential,
    /// Mobility `m(c, z)`.
    pub mobility: Poly2,
    /// Concentration range on which `m` and `a` are evaluated; arguments are clamped to it.
    pub coefficient_clip: f64,
}

impl Default for MaterialModel {
    fn default() -> Self {
        MaterialModel {
            potential: ConcentrationPotential::default(),
            elastic: ElasticModel::default(),
            heat: HeatModel::default(),
            sigma: DamagePotential::default(),
            mobility: Poly2::constant(1.0),
            coefficient_clip: 10.0,
        }
    }
}

impl MaterialModel {
    fn clip(&self, c: f64, z: f64) -> (f64, f64) {
        (c.clamp(-self.coefficient_clip, self.coefficient_clip), z.clamp(0.0, 1.0))
    }

    pub fn mobility(&self, c: f64, z: f64) -> f64 {
        count_evaluation();
        let (c, z) = self.clip(c, z);
        self.mobility.eval(c, z)
    }

    pub fn viscosity_coefficient(&self, c: f64, z: f64) -> f64 {
        count_evaluation();
        let (c, z) = self.clip(c, z);
        self.elastic.a.eval(c, z)
    }

    fn coefficient_box(&self) -> (Interval, Interval) {
        (Interval::new(-self.coefficient_clip, self.coefficient_clip), Interval::new(0.0, 1.0))
    }

    /// Lower and upper enclosures of `m` on the clipped box.
    pub fn mobility_bounds(&self) -> Interval {
        let (c, z) = self.coefficient_box();
        if self.mobility.is_constant() {
            return Interval::point(self.mobility.eval(0.0, 0.0));
        }
        self.mobility.eval_interval(c, z)
    }

    /// `(a0, a1, a2)`: bounds of `a` and of `|a_c| + |a_z|`.
    pub fn viscosity_bounds(&self) -> (f64, f64, f64) {
        let a = &self.elastic.a;
        if a.is_constant() {
            let v = a.eval(0.0, 0.0);
            return (v, v, 0.0);
        }
        let (c, z) = self.coefficient_box();
        let r = a.eval_interval(c, z);
        let g = a.d_c().eval_interval(c, z).abs_max() + a.d_z().eval_interval(c, z).abs_max();
        (r.lo, r.hi, g)
    }

    /// Every violated constitutive hypothesis, as readable messages.
    pub fn validate(&self, reg: &RegularizationParams) -> Vec<String> {
        let mut out = Vec::new();
        self.potential.validate(reg, &mut out);
        self.heat.validate(&mut out);
        self.sigma.validate(&mut out);
        let e = &self.elastic;
        if !(e.lame_mu > 0.0) {
            out.push(format!(
                "material.elastic: ellipticity of C requires lame_mu > 0 (got {})",
                e.lame_mu
            ));
        }
        for d in 1..=3 {
            if !(d as f64 * e.lame_lambda + 2.0 * e.lame_mu > 0.0) {
                out.push(format!(
                    "material.elastic: ellipticity of C requires {d} lame_lambda + 2 lame_mu > 0"
                ));
                break;
            }
        }
        if !(e.viscosity_factor > 0.0) {
            out.push(format!(
                "material.elastic: viscosity tensor needs a positive viscosity_factor (got {})",
                e.viscosity_factor
            ));
        }
        let rmax = reg.trunc_max();
        let b = e.b_range(Interval::new(-rmax, rmax));
        if b.lo < 0.0 {
            out.push(format!(
                "material.elastic: coupling b(c, z) must be nonnegative on the truncation range (lower enclosure {})",
                b.lo
            ));
        }
        let (a0, _, _) = self.viscosity_bounds();
        if !(a0 > 0.0) {
            out.push(format!(
                "material.elastic: viscosity coefficient needs a0 > 0 (lower enclosure {a0})"
            ));
        }
        let m = self.mobility_bounds();
        if !(m.lo > 0.0) {
            out.push(format!("material.mobility: mobility needs m0 > 0 (lower enclosure {})", m.lo));
        }
        if !(reg.omega > 0.0) {
            out.push(format!("material.regularization: omega_reg must be positive (got {})", reg.omega));
        }
        if !(reg.trunc_halfwidth > 0.0) {
            out.push(format!(
                "material.regularization: trunc_halfwidth must be positive (got {})",
                reg.trunc_halfwidth
            ));
        }
        out
    }
}

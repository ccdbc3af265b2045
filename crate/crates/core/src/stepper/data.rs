//! Space-time data and its local means over time intervals.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::grid::{boundary_flux_load, Mesh};

/// Spatial profile of a scalar datum or initial field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceProfile {
    Uniform { value: f64 },
    /// `value + gradient . x`.
    Linear { value: f64, gradient: Vec<f64> },
    /// `base + amplitude * exp(-|x - center|^2 / width^2)`.
    Gaussian {
        #[serde(default)]
        base: f64,
        amplitude: f64,
        center: Vec<f64>,
        width: f64,
    },
    /// Seeded uniform noise `mean + amplitude * U(-1, 1)`, one draw per node.
    Noise { mean: f64, amplitude: f64, seed: u64 },
    /// Explicit nodal values (length must match the mesh).
    Nodal { values: Vec<f64> },
}

impl Default for SpaceProfile {
    fn default() -> Self {
        SpaceProfile::Uniform { value: 0.0 }
    }
}

impl SpaceProfile {
    pub fn uniform(value: f64) -> Self {
        SpaceProfile::Uniform { value }
    }

    /// Nodal values on `mesh`.
    pub fn sample(&self, mesh: &Mesh) -> Vec<f64> {
        match self {
            SpaceProfile::Noise { mean, amplitude, seed } => {
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
                (0..mesh.n_nodes).map(|_| mean + amplitude * rng.gen_range(-1.0..=1.0)).collect()
            }
            SpaceProfile::Nodal { values } => values.clone(),
            _ => mesh.nodal(|x| self.eval(x)),
        }
    }

    /// Pointwise value; noise and nodal profiles evaluate to their mean (only used through `sample`).
    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        match self {
            SpaceProfile::Uniform { value } => *value,
            SpaceProfile::Linear { value, gradient } => {
                value + gradient.iter().enumerate().map(|(k, g)| g * x[k]).sum::<f64>()
            }
            SpaceProfile::Gaussian { base, amplitude, center, width } => {
                let r2: f64 = center.iter().enumerate().map(|(k, c)| (x[k] - c).powi(2)).sum();
                base + amplitude * (-r2 / (width * width)).exp()
            }
            SpaceProfile::Noise { mean, .. } => *mean,
            SpaceProfile::Nodal { .. } => f64::NAN,
        }
    }

    /// Lower bound over the box `[0, L]`.
    pub fn lower_bound(&self, extents: &[f64]) -> f64 {
        match self {
            SpaceProfile::Uniform { value } => *value,
            SpaceProfile::Linear { value, gradient } => {
                value + gradient.iter().zip(extents).map(|(g, l)| (g * l).min(0.0)).sum::<f64>()
            }
            SpaceProfile::Gaussian { base, amplitude, .. } => base + amplitude.min(0.0),
            SpaceProfile::Noise { mean, amplitude, .. } => mean - amplitude.abs(),
            SpaceProfile::Nodal { values } => values.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }

    /// Upper bound over the box `[0, L]`.
    pub fn upper_bound(&self, extents: &[f64]) -> f64 {
        match self {
            SpaceProfile::Uniform { value } => *value,
            SpaceProfile::Linear { value, gradient } => {
                value + gradient.iter().zip(extents).map(|(g, l)| (g * l).max(0.0)).sum::<f64>()
            }
            SpaceProfile::Gaussian { base, amplitude, .. } => base + amplitude.max(0.0),
            SpaceProfile::Noise { mean, amplitude, .. } => mean + amplitude.abs(),
            SpaceProfile::Nodal { values } => values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Temporal factor of a space-time datum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TimeProfile {
    #[default]
    Constant,
    /// `offset + rate * t`.
    Linear { offset: f64, rate: f64 },
    /// Piecewise linear through `(t, value)` pairs, constant outside.
    Series { points: Vec<(f64, f64)> },
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Linear { offset, rate } => offset + rate * t,
            TimeProfile::Series { points } => series_eval(points, t),
        }
    }

    /// Mean over `[t0, t1]`; exact for every variant.
    pub fn mean(&self, t0: f64, t1: f64) -> f64 {
        if t1 <= t0 {
            return self.eval(t1);
        }
        match self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Linear { offset, rate } => offset + rate * 0.5 * (t0 + t1),
            TimeProfile::Series { points } => {
                // trapezoid over the breakpoints inside the interval
                let mut knots = vec![t0];
                knots.extend(points.iter().map(|p| p.0).filter(|&t| t > t0 && t < t1));
                knots.push(t1);
                let mut s = 0.0;
                for w in knots.windows(2) {
                    s += 0.5 * (w[1] - w[0]) * (series_eval(points, w[0]) + series_eval(points, w[1]));
                }
                s / (t1 - t0)
            }
        }
    }

    /// Lower bound of the factor on `[0, horizon]`.
    pub fn lower_bound(&self, horizon: f64) -> f64 {
        match self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Linear { offset, rate } => offset.min(offset + rate * horizon),
            TimeProfile::Series { points } => points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
        }
    }
}

fn series_eval(points: &[(f64, f64)], t: f64) -> f64 {
    match points.len() {
        0 => 0.0,
        _ if t <= points[0].0 => points[0].1,
        n if t >= points[n - 1].0 => points[n - 1].1,
        _ => {
            let k = points.partition_point(|p| p.0 <= t);
            let (a, b) = (points[k - 1], points[k]);
            a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
        }
    }
}

/// Separable datum `space(x) * time(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct ScalarData {
    pub space: SpaceProfile,
    pub time: TimeProfile,
}

impl ScalarData {
    pub fn zero() -> Self {
        ScalarData::default()
    }

    pub fn constant(value: f64) -> Self {
        ScalarData { space: SpaceProfile::uniform(value), time: TimeProfile::Constant }
    }

    pub fn value(&self, x: &[f64; 3], t: f64) -> f64 {
        self.space.eval(x) * self.time.eval(t)
    }

    pub fn nodal_mean(&self, mesh: &Mesh, t0: f64, t1: f64) -> Vec<f64> {
        let s = self.time.mean(t0, t1);
        self.space.sample(mesh).into_iter().map(|v| v * s).collect()
    }

    pub fn nodal_value(&self, mesh: &Mesh, t: f64) -> Vec<f64> {
        let s = self.time.eval(t);
        self.space.sample(mesh).into_iter().map(|v| v * s).collect()
    }

    pub fn is_nonnegative(&self, extents: &[f64], horizon: f64) -> bool {
        self.space.lower_bound(extents) >= 0.0 && self.time.lower_bound(horizon) >= 0.0
    }
}

/// Vector datum, one scalar datum per component (missing components are zero).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct VectorData {
    pub components: Vec<ScalarData>,
}

impl VectorData {
    fn interleave(mesh: &Mesh, parts: Vec<Vec<f64>>) -> Vec<f64> {
        let d = mesh.dim;
        let mut out = vec![0.0; d * mesh.n_nodes];
        for (k, p) in parts.into_iter().enumerate().take(d) {
            for i in 0..mesh.n_nodes {
                out[d * i + k] = p[i];
            }
        }
        out
    }

    pub fn nodal_mean(&self, mesh: &Mesh, t0: f64, t1: f64) -> Vec<f64> {
        Self::interleave(mesh, self.components.iter().map(|c| c.nodal_mean(mesh, t0, t1)).collect())
    }

    pub fn nodal_value(&self, mesh: &Mesh, t: f64) -> Vec<f64> {
        Self::interleave(mesh, self.components.iter().map(|c| c.nodal_value(mesh, t)).collect())
    }
}

/// External data `f`, `g`, `h` and the Dirichlet displacement `u_D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct DataSampler {
    pub f: VectorData,
    pub g: ScalarData,
    pub h: ScalarData,
    pub u_d: VectorData,
}

/// Nodal data for one time interval `(t0, t1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepData {
    pub t0: f64,
    pub t1: f64,
    /// Local mean of `f` (interleaved).
    pub f: Vec<f64>,
    /// Local mean of `g`.
    pub g: Vec<f64>,
    /// Boundary load of the local mean of `h`.
    pub hload: Vec<f64>,
    /// `u_D(t1)` at every node.
    pub u_d: Vec<f64>,
    /// `u_D(t0)` at every node.
    pub u_d_old: Vec<f64>,
}

impl DataSampler {
    pub fn step_data(&self, mesh: &Mesh, t0: f64, t1: f64) -> Result<StepData, Error> {
        let h = self.h.nodal_mean(mesh, t0, t1);
        Ok(StepData {
            t0,
            t1,
            f: self.f.nodal_mean(mesh, t0, t1),
            g: self.g.nodal_mean(mesh, t0, t1),
            hload: boundary_flux_load(mesh, &h)?,
            u_d: self.u_d.nodal_value(mesh, t1),
            u_d_old: self.u_d.nodal_value(mesh, t0),
        })
    }

    pub fn validate(&self, mesh_extents: &[f64], dim: usize, horizon: f64) -> Vec<String> {
        let mut out = Vec::new();
        if !self.g.is_nonnegative(mesh_extents, horizon) {
            out.push("data.g: heat source must be nonnegative".into());
        }
        if !self.h.is_nonnegative(mesh_extents, horizon) {
            out.push("data.h: boundary heat flux must be nonnegative".into());
        }
        if self.f.components.len() > dim || self.u_d.components.len() > dim {
            out.push(format!("data: vector data may have at most {dim} components"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_means_are_exact() {
        let lin = TimeProfile::Linear { offset: 1.0, rate: 2.0 };
        assert_eq!(lin.mean(0.0, 1.0), 2.0);
        let s = TimeProfile::Series { points: vec![(0.0, 0.0), (1.0, 2.0), (2.0, 2.0)] };
        assert!((s.mean(0.5, 1.5) - (0.5 * 0.5 * (1.0 + 2.0) + 0.5 * 2.0)).abs() < 1e-15);
        assert_eq!(s.eval(3.0), 2.0);
    }

    #[test]
    fn bounds_of_linear_profile() {
        let p = SpaceProfile::Linear { value: 1.0, gradient: vec![-2.0, 1.0] };
        assert_eq!(p.lower_bound(&[1.0, 1.0]), -1.0);
        assert_eq!(p.upper_bound(&[1.0, 1.0]), 2.0);
    }
}

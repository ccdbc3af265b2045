use serde::{Deserialize, Serialize};

use super::poly::Poly1;

/// Damage potential `sigma(z)` with its curvature bound on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Poly1", into = "Poly1")]
pub struct DamagePotential {
    pub sigma: Poly1,
    pub l_sigma: f64,
}

impl From<Poly1> for DamagePotential {
    fn from(p: Poly1) -> Self {
        DamagePotential::new(p)
    }
}

impl From<DamagePotential> for Poly1 {
    fn from(d: DamagePotential) -> Self {
        d.sigma
    }
}

impl Default for DamagePotential {
    fn default() -> Self {
        DamagePotential::linear(0.1)
    }
}

impl DamagePotential {
    pub fn new(sigma: Poly1) -> Self {
        let s2 = sigma.derivative().derivative();
        // s2 has degree <= 2 for admissible input: extremes at the ends or the vertex
        let mut l = s2.eval(0.0).abs().max(s2.eval(1.0).abs());
        if s2.coeffs.len() >= 3 && s2.coeffs[2] != 0.0 {
            let v = -s2.coeffs[1] / (2.0 * s2.coeffs[2]);
            if (0.0..=1.0).contains(&v) {
                l = l.max(s2.eval(v).abs());
            }
        }
        DamagePotential { sigma, l_sigma: l }
    }

    /// `sigma(z) = alpha (1 - z)`.
    pub fn linear(alpha: f64) -> Self {
        DamagePotential::new(Poly1::new(vec![alpha, -alpha]))
    }

    pub fn value(&self, z: f64) -> f64 {
        self.sigma.eval(z)
    }

    pub fn prime(&self, z: f64) -> f64 {
        self.sigma.derivative().eval(z)
    }

    pub fn second(&self, z: f64) -> f64 {
        self.sigma.derivative().derivative().eval(z)
    }

    /// Convex part at `z_new` plus concave part at `z_old`.
    pub fn splitting_drive(&self, z_new: f64, z_old: f64) -> f64 {
        self.prime(z_new) + self.l_sigma * (z_new - z_old)
    }

    pub fn validate(&self, out: &mut Vec<String>) {
        if self.sigma.degree() > 4 {
            out.push(format!(
                "material.sigma: damage potential must have degree <= 4 (got {})",
                self.sigma.degree()
            ));
        }
        for i in 0..=64 {
            let z = i as f64 / 64.0;
            if self.second(z) + self.l_sigma < -1e-12 {
                out.push(format!("material.sigma: convex part of the split fails at z = {z}"));
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curvature_bound_of_quartic() {
        // sigma = z^4 - 3 z^2 + z^3, sigma'' = 12 z^2 + 6 z - 6 ranges over [-6.75, 12]
        let d = DamagePotential::new(Poly1::new(vec![0.0, 0.0, -3.0, 1.0, 1.0]));
        assert_eq!(d.l_sigma, 12.0);
        let e = DamagePotential::new(Poly1::new(vec![0.0, 0.0, 0.0, -2.0, 2.0]));
        // sigma'' = 24 z^2 - 12 z has its vertex value -1.5 at z = 1/4
        assert_eq!(e.l_sigma, 12.0);
        assert!(e.second(0.25) == -1.5);
        let lin = DamagePotential::linear(0.3);
        assert_eq!(lin.l_sigma, 0.0);
        assert_eq!(lin.splitting_drive(0.2, 0.9), -0.3);
    }
}

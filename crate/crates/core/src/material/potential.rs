use serde::{Deserialize, Serialize};

use super::RegularizationParams;
use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    /// `beta_hat(c) = c^4 / 4`.
    Polynomial,
    /// Indicator of `[bounds.0, bounds.1]`.
    Indicator,
}

/// Concentration potential `phi = beta_hat + gamma` with quadratic `gamma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcentrationPotential {
    pub kind: PotentialKind,
    pub bounds: (f64, f64),
    /// `gamma(c) = gamma[0] + gamma[1] c + gamma[2] c^2`.
    pub gamma: [f64; 3],
    /// Upper bound on `gamma''`.
    pub lambda_gamma: f64,
}

impl Default for ConcentrationPotential {
    fn default() -> Self {
        ConcentrationPotential::polynomial_well()
    }
}

impl ConcentrationPotential {
    /// `(c^2 - 1)^2 / 4`.
    pub fn polynomial_well() -> Self {
        ConcentrationPotential {
            kind: PotentialKind::Polynomial,
            bounds: (-1.0, 1.0),
            gamma: [0.25, 0.0, -0.5],
            lambda_gamma: 0.5,
        }
    }

    pub fn indicator(lo: f64, hi: f64) -> Self {
        ConcentrationPotential {
            kind: PotentialKind::Indicator,
            bounds: (lo, hi),
            gamma: [0.0; 3],
            lambda_gamma: 0.0,
        }
    }

    pub fn gamma(&self, c: f64) -> f64 {
        self.gamma[0] + c * (self.gamma[1] + c * self.gamma[2])
    }

    pub fn gamma_prime(&self, c: f64) -> f64 {
        self.gamma[1] + 2.0 * self.gamma[2] * c
    }

    /// Resolvent `r` with `r + omega beta(r) = c`.
    pub fn resolvent(&self, c: f64, reg: &RegularizationParams) -> Result<f64, Error> {
        match self.kind {
            PotentialKind::Indicator => Ok(c.clamp(self.bounds.0, self.bounds.1)),
            PotentialKind::Polynomial => cubic_resolvent(c, reg.omega),
        }
    }

    /// Yosida approximation `beta_omega(c)`.
    pub fn yosida(&self, c: f64, reg: &RegularizationParams) -> Result<f64, Error> {
        let r = self.resolvent(c, reg)?;
        Ok(match self.kind {
            PotentialKind::Indicator => (c - r) / reg.omega,
            PotentialKind::Polynomial => r * r * r,
        })
    }

    /// Derivative of `beta_omega` (a.e. for the indicator).
    pub fn yosida_prime(&self, c: f64, reg: &RegularizationParams) -> Result<f64, Error> {
        let r = self.resolvent(c, reg)?;
        Ok(match self.kind {
            PotentialKind::Indicator => {
                if c < self.bounds.0 || c > self.bounds.1 {
                    1.0 / reg.omega
                } else {
                    0.0
                }
            }
            PotentialKind::Polynomial => 3.0 * r * r / (1.0 + 3.0 * reg.omega * r * r),
        })
    }

    /// Moreau envelope `beta_hat_omega(c)`.
    pub fn yosida_energy(&self, c: f64, reg: &RegularizationParams) -> Result<f64, Error> {
        let r = self.resolvent(c, reg)?;
        Ok(match self.kind {
            PotentialKind::Indicator => (c - r).powi(2) / (2.0 * reg.omega),
            PotentialKind::Polynomial => {
                let r2 = r * r;
                0.25 * r2 * r2 + 0.5 * reg.omega * r2 * r2 * r2
            }
        })
    }

    /// `phi_omega = beta_hat_omega + gamma`.
    pub fn phi_omega(&self, c: f64, reg: &RegularizationParams) -> Result<f64, Error> {
        Ok(self.yosida_energy(c, reg)? + self.gamma(c))
    }

    /// Convex part at the new value plus concave part at the old one.
    pub fn splitting_drive(
        &self,
        c_new: f64,
        c_old: f64,
        reg: &RegularizationParams,
    ) -> Result<f64, Error> {
        let l = self.lambda_gamma;
        Ok(self.yosida(c_new, reg)? + l * c_new + self.gamma_prime(c_old) - l * c_old)
    }

    /// Derivative of the drive with respect to `c_new`.
    pub fn splitting_drive_prime(&self, c_new: f64, reg: &RegularizationParams) -> Result<f64, Error> {
        Ok(self.yosida_prime(c_new, reg)? + self.lambda_gamma)
    }

    pub fn validate(&self, reg: &RegularizationParams, out: &mut Vec<String>) {
        if self.kind == PotentialKind::Indicator {
            let (lo, hi) = self.bounds;
            if !(lo < hi) {
                out.push(format!(
                    "material.potential: indicator bounds must satisfy lo < hi (got {lo}, {hi})"
                ));
            } else if !(lo <= 0.0 && 0.0 <= hi) {
                out.push(format!(
                    "material.potential: convex part must vanish at 0, so 0 must lie in [{lo}, {hi}]"
                ));
            }
        }
        if !(self.lambda_gamma >= 0.0) {
            out.push(format!(
                "material.potential: lambda_gamma must be nonnegative (got {})",
                self.lambda_gamma
            ));
        }
        if 2.0 * self.gamma[2] > self.lambda_gamma {
            out.push(format!(
                "material.potential: gamma'' = {} exceeds the semiconvexity bound lambda_gamma = {}",
                2.0 * self.gamma[2],
                self.lambda_gamma
            ));
        }
        if self.gamma[2] < 0.0 && self.gamma[2] + 0.5 / reg.omega <= 0.0 {
            out.push(format!(
                "material.potential: regularized potential unbounded below; need gamma[2] > -1/(2 omega_reg) = {}",
                -0.5 / reg.omega
            ));
        }
    }
}

/// Real root of `r + w r^3 = c`, Newton safeguarded by the bracket between 0 and c.
fn cubic_resolvent(c: f64, w: f64) -> Result<f64, Error> {
    if c == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = if c > 0.0 { (0.0, c) } else { (c, 0.0) };
    let mut r = c / (1.0 + w * c * c).cbrt().max(1.0);
    r = r.clamp(lo, hi);
    let tol = 1e-14 * (1.0 + c.abs());
    for _ in 0..200 {
        let f = r + w * r * r * r - c;
        if f.abs() <= tol {
            return Ok(r);
        }
        if f > 0.0 {
            hi = r;
        } else {
            lo = r;
        }
        let step = f / (1.0 + 3.0 * w * r * r);
        let mut next = r - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == r || hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()) {
            return Ok(next);
        }
        r = next;
    }
    Err(Error::ResolventDivergence { c })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolvent_satisfies_equation() {
        for &w in &[1e-6, 1e-3, 1.0, 50.0] {
            for i in -50..=50 {
                let c = i as f64 * 0.37;
                let r = cubic_resolvent(c, w).unwrap();
                assert!((r + w * r * r * r - c).abs() <= 1e-13 * (1.0 + c.abs()));
            }
        }
    }

    #[test]
    fn envelope_derivative_is_yosida() {
        let p = ConcentrationPotential::polynomial_well();
        let reg = RegularizationParams { omega: 0.05, ..Default::default() };
        for i in -20..=20 {
            let c = i as f64 * 0.15;
            let h = 1e-6;
            let fd = (p.yosida_energy(c + h, &reg).unwrap() - p.yosida_energy(c - h, &reg).unwrap())
                / (2.0 * h);
            let y = p.yosida(c, &reg).unwrap();
            assert!((fd - y).abs() < 1e-6 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn indicator_needs_zero_inside() {
        let mut v = Vec::new();
        ConcentrationPotential::indicator(0.5, 1.0).validate(&RegularizationParams::default(), &mut v);
        assert_eq!(v.len(), 1);
    }
}

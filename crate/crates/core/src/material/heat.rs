use serde::{Deserialize, Serialize};

/// Heat conduction `K(theta) = c0 (1 + theta^kappa)` and thermal expansion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatModel {
    pub c0: f64,
    pub c1: f64,
    pub kappa: f64,
    pub rho: f64,
    /// Level `M` of the truncations `K_M`, `T_M`; `None` disables them.
    pub truncation: Option<f64>,
}

impl Default for HeatModel {
    fn default() -> Self {
        HeatModel { c0: 1.0, c1: 1.0, kappa: 1.5, rho: 0.5, truncation: None }
    }
}

impl HeatModel {
    pub fn k(&self, theta: f64) -> f64 {
        self.c0 * (1.0 + theta.max(0.0).powf(self.kappa))
    }

    pub fn k_prime(&self, theta: f64) -> f64 {
        if theta > 0.0 {
            self.c0 * self.kappa * theta.powf(self.kappa - 1.0)
        } else {
            0.0
        }
    }

    pub fn k_m(&self, r: f64) -> f64 {
        match self.truncation {
            Some(m) => self.k(r.clamp(0.0, m)),
            None => self.k(r),
        }
    }

    pub fn k_m_prime(&self, r: f64) -> f64 {
        match self.truncation {
            Some(m) if r >= m => 0.0,
            _ => self.k_prime(r),
        }
    }

    pub fn t_m(&self, r: f64) -> f64 {
        match self.truncation {
            Some(m) => r.clamp(0.0, m),
            None => r,
        }
    }

    pub fn t_m_prime(&self, r: f64) -> f64 {
        match self.truncation {
            Some(m) if r <= 0.0 || r >= m => 0.0,
            _ => 1.0,
        }
    }

    pub fn validate(&self, out: &mut Vec<String>) {
        if !(self.kappa > 1.0) {
            out.push(format!(
                "material.heat: conductivity growth exponent requires kappa > 1 (got {})",
                self.kappa
            ));
        }
        if !(self.c0 > 0.0) {
            out.push(format!("material.heat: conductivity bound requires c0 > 0 (got {})", self.c0));
        }
        if !(self.c1 >= self.c0) {
            out.push(format!(
                "material.heat: conductivity bounds require c1 >= c0 (got c1 = {}, c0 = {})",
                self.c1, self.c0
            ));
        }
        if !(self.rho > 0.0) {
            out.push(format!("material.heat: thermal expansion requires rho > 0 (got {})", self.rho));
        }
        if let Some(m) = self.truncation {
            if !(m >= 0.0) {
                out.push(format!("material.heat: truncation level must be nonnegative (got {m})"));
            }
        }
    }
}

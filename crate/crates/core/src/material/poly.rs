//! Small polynomial types with interval enclosures.

use serde::{Deserialize, Serialize};

/// Closed interval `[lo, hi]` with outward-free arithmetic (no rounding control).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn add(self, o: Interval) -> Interval {
        Interval::new(self.lo + o.lo, self.hi + o.hi)
    }

    pub fn mul(self, o: Interval) -> Interval {
        let p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        Interval::new(
            p.iter().cloned().fold(f64::INFINITY, f64::min),
            p.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    }

    pub fn scale(self, s: f64) -> Interval {
        if s >= 0.0 {
            Interval::new(s * self.lo, s * self.hi)
        } else {
            Interval::new(s * self.hi, s * self.lo)
        }
    }

    /// Tight enclosure of `x^n` (even powers are nonnegative).
    pub fn powi(self, n: u32) -> Interval {
        if n == 0 {
            return Interval::point(1.0);
        }
        let a = self.lo.powi(n as i32);
        let b = self.hi.powi(n as i32);
        if n % 2 == 1 {
            Interval::new(a, b)
        } else if self.lo >= 0.0 {
            Interval::new(a, b)
        } else if self.hi <= 0.0 {
            Interval::new(b, a)
        } else {
            Interval::new(0.0, a.max(b))
        }
    }

    pub fn abs_max(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn hull(self, o: Interval) -> Interval {
        Interval::new(self.lo.min(o.lo), self.hi.max(o.hi))
    }
}

/// Univariate polynomial `sum_k a_k x^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly1 {
    pub coeffs: Vec<f64>,
}

impl Poly1 {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Poly1 { coeffs }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a)
    }

    pub fn derivative(&self) -> Poly1 {
        Poly1 {
            coeffs: self.coeffs.iter().enumerate().skip(1).map(|(k, &a)| k as f64 * a).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&a| a != 0.0).unwrap_or(0)
    }

    pub fn eval_interval(&self, x: Interval) -> Interval {
        let mut acc = Interval::point(0.0);
        for (k, &a) in self.coeffs.iter().enumerate() {
            if a != 0.0 {
                acc = acc.add(x.powi(k as u32).scale(a));
            }
        }
        acc
    }
}

/// Bivariate polynomial `sum a_ij c^i z^j`, stored as `(i, j, a_ij)` terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly2 {
    pub terms: Vec<(u32, u32, f64)>,
}

impl Poly2 {
    pub fn from_terms(terms: &[(u32, u32, f64)]) -> Self {
        Poly2 { terms: terms.to_vec() }
    }

    pub fn constant(a: f64) -> Self {
        Poly2 { terms: vec![(0, 0, a)] }
    }

    pub fn eval(&self, c: f64, z: f64) -> f64 {
        self.terms.iter().map(|&(i, j, a)| a * c.powi(i as i32) * z.powi(j as i32)).sum()
    }

    pub fn d_c(&self) -> Poly2 {
        Poly2 {
            terms: self
                .terms
                .iter()
                .filter(|t| t.0 > 0)
                .map(|&(i, j, a)| (i - 1, j, a * i as f64))
                .collect(),
        }
    }

    pub fn d_z(&self) -> Poly2 {
        Poly2 {
            terms: self
                .terms
                .iter()
                .filter(|t| t.1 > 0)
                .map(|&(i, j, a)| (i, j - 1, a * j as f64))
                .collect(),
        }
    }

    pub fn eval_interval(&self, c: Interval, z: Interval) -> Interval {
        let mut acc = Interval::point(0.0);
        for &(i, j, a) in &self.terms {
            acc = acc.add(c.powi(i).mul(z.powi(j)).scale(a));
        }
        acc
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| (t.0 == 0 && t.1 == 0) || t.2 == 0.0)
    }

    /// True when the polynomial is exactly `z^2`.
    pub fn is_z_squared(&self) -> bool {
        let nz: Vec<_> = self.terms.iter().filter(|t| t.2 != 0.0).collect();
        nz.len() == 1 && nz[0].0 == 0 && nz[0].1 == 2 && nz[0].2 == 1.0
    }
}

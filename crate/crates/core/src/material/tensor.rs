use std::ops::{Add, Mul, Sub};

/// Symmetric tensor in `d <= 3` dimensions; entries beyond `d` stay zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sym {
    pub d: usize,
    pub m: [[f64; 3]; 3],
}

impl Sym {
    pub fn zero(d: usize) -> Sym {
        Sym { d, m: [[0.0; 3]; 3] }
    }

    pub fn identity(d: usize) -> Sym {
        Sym::scalar(d, 1.0)
    }

    pub fn scalar(d: usize, s: f64) -> Sym {
        let mut t = Sym::zero(d);
        for i in 0..d {
            t.m[i][i] = s;
        }
        t
    }

    pub fn diag(d: usize, v: [f64; 3]) -> Sym {
        let mut t = Sym::zero(d);
        for i in 0..d {
            t.m[i][i] = v[i];
        }
        t
    }

    /// Symmetric part of a displacement gradient `g[i][j] = d u_i / d x_j`.
    pub fn sym_grad(d: usize, g: &[[f64; 3]; 3]) -> Sym {
        let mut t = Sym::zero(d);
        for i in 0..d {
            for j in 0..d {
                t.m[i][j] = 0.5 * (g[i][j] + g[j][i]);
            }
        }
        t
    }

    pub fn trace(&self) -> f64 {
        (0..self.d).map(|i| self.m[i][i]).sum()
    }

    pub fn ddot(&self, o: &Sym) -> f64 {
        let mut s = 0.0;
        for i in 0..self.d {
            for j in 0..self.d {
                s += self.m[i][j] * o.m[i][j];
            }
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.ddot(self).sqrt()
    }
}

impl Add for Sym {
    type Output = Sym;
    fn add(mut self, o: Sym) -> Sym {
        for i in 0..3 {
            for j in 0..3 {
                self.m[i][j] += o.m[i][j];
            }
        }
        self
    }
}

impl Sub for Sym {
    type Output = Sym;
    fn sub(mut self, o: Sym) -> Sym {
        for i in 0..3 {
            for j in 0..3 {
                self.m[i][j] -= o.m[i][j];
            }
        }
        self
    }
}

impl Mul<Sym> for f64 {
    type Output = Sym;
    fn mul(self, mut t: Sym) -> Sym {
        for row in t.m.iter_mut() {
            for v in row.iter_mut() {
                *v *= self;
            }
        }
        t
    }
}

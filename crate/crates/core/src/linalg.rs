//! Sparse triplet/CSR storage and a banded LU factorization with partial pivoting.

use crate::error::Error;

/// Anything that accepts additive matrix entries.
pub trait Assemble {
    fn add(&mut self, i: usize, j: usize, v: f64);
}

/// Scatters a block into a larger system: `(i, j) -> (rs * i + ro, cs * j + co)`, scaled.
pub struct Block<'a, A: Assemble> {
    pub inner: &'a mut A,
    pub rs: usize,
    pub ro: usize,
    pub cs: usize,
    pub co: usize,
    pub scale: f64,
}

impl<'a, A: Assemble> Block<'a, A> {
    pub fn new(inner: &'a mut A, rs: usize, ro: usize, cs: usize, co: usize, scale: f64) -> Self {
        Block { inner, rs, ro, cs, co, scale }
    }
}

impl<A: Assemble> Assemble for Block<'_, A> {
    #[inline]
    fn add(&mut self, i: usize, j: usize, v: f64) {
        self.inner.add(self.rs * i + self.ro, self.cs * j + self.co, self.scale * v);
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

/// Triplet accumulator that converts into [`SparseMatrix`].
#[derive(Debug, Clone, Default)]
pub struct Triplets {
    pub n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(n: usize) -> Self {
        Triplets { n, entries: Vec::new() }
    }

    pub fn into_csr(mut self) -> SparseMatrix {
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0; self.n + 1];
        let mut cols = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix { n: self.n, row_ptr, cols, vals }
    }
}

impl Assemble for Triplets {
    fn add(&mut self, i: usize, j: usize, v: f64) {
        self.entries.push((i, j, v));
    }
}

impl SparseMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).map(|k| self.vals[k] * x[self.cols[k]]).sum())
            .collect()
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.vals[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum()).collect()
    }

    /// Largest `|A_ij - A_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.vals.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                worst = worst.max((self.vals[k] - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    pub fn pattern_is_symmetric(&self) -> bool {
        (0..self.n).all(|i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).all(|k| {
                let j = self.cols[k];
                let r = self.row_ptr[j]..self.row_ptr[j + 1];
                self.cols[r].binary_search(&i).is_ok()
            })
        })
    }

    pub fn to_band(&self) -> BandMatrix {
        let mut bw = 0;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                bw = bw.max(self.cols[k].abs_diff(i));
            }
        }
        let mut b = BandMatrix::new(self.n, bw, bw);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                b.add(i, self.cols[k], self.vals[k]);
            }
        }
        b
    }
}

/// Row-major band storage with room for pivoting fill.
///
/// Row `i` keeps columns `i - kl ..= i + kl + ku`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku, "({i},{j}) outside band");
        i * self.width + (j + self.kl - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    /// Replace row `i` by the identity row (Dirichlet constraint).
    pub fn set_identity_row(&mut self, i: usize) {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        for j in lo..=hi {
            self.set(i, j, if i == j { 1.0 } else { 0.0 });
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.data[self.idx(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// In-place LU factorization with partial pivoting.
    pub fn factor(mut self) -> Result<BandLu, Error> {
        let n = self.n;
        let kl = self.kl;
        let reach = kl + self.ku;
        let mut piv = vec![0usize; n];
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for r in k + 1..=last {
                let v = self.data[self.idx(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > 1e-300 && best > scale * 1e-15) {
                return Err(Error::LinearSolveFailure(format!("singular pivot in column {k}")));
            }
            piv[k] = p;
            let cmax = (k + reach).min(n - 1);
            if p != k {
                for j in k..=cmax {
                    let a = self.idx(k, j);
                    let b = self.idx(p, j);
                    self.data.swap(a, b);
                }
            }
            let d = self.data[self.idx(k, k)];
            for r in k + 1..=last {
                let ir = self.idx(r, k);
                let l = self.data[ir] / d;
                self.data[ir] = l;
                if l != 0.0 {
                    for j in k + 1..=cmax {
                        let kj = self.data[self.idx(k, j)];
                        let rj = self.idx(r, j);
                        self.data[rj] -= l * kj;
                    }
                }
            }
        }
        Ok(BandLu { a: self, piv })
    }
}

impl Assemble for BandMatrix {
    #[inline]
    fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    a: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let a = &self.a;
        let n = a.n;
        let reach = a.kl + a.ku;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            for r in k + 1..=(k + a.kl).min(n - 1) {
                x[r] -= a.data[a.idx(r, k)] * xk;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..=(k + reach).min(n - 1) {
                s -= a.data[a.idx(k, j)] * x[j];
            }
            x[k] = s / a.data[a.idx(k, k)];
        }
        x
    }
}

/// Solve `A x = b` for a band matrix, consuming it.
pub fn band_solve(a: BandMatrix, b: &[f64]) -> Result<Vec<f64>, Error> {
    let lu = a.factor()?;
    let x = lu.solve(b);
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::LinearSolveFailure("non-finite solution".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn band_lu_matches_residual_with_pivoting() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for &(n, kl, ku) in &[(1, 0, 0), (7, 1, 1), (40, 3, 5), (60, 6, 2)] {
            let mut a = BandMatrix::new(n, kl, ku);
            for i in 0..n {
                for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    // weak diagonal forces row exchanges
                    let v: f64 = rng.gen_range(-1.0..1.0);
                    a.add(i, j, if i == j { 0.01 * v } else { v });
                }
            }
            let x0: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
            let b = a.matvec(&x0);
            let x = band_solve(a, &b).unwrap();
            for (u, v) in x.iter().zip(&x0) {
                assert!((u - v).abs() < 1e-8, "n={n}");
            }
        }
    }

    #[test]
    fn csr_accumulates_duplicates() {
        let mut t = Triplets::new(2);
        t.add(0, 0, 1.0);
        t.add(0, 0, 2.0);
        t.add(1, 0, -1.0);
        t.add(0, 1, -1.0);
        let m = t.into_csr();
        assert_eq!(m.get(0, 0), 3.0);
        assert!(m.pattern_is_symmetric());
        assert_eq!(m.asymmetry(), 0.0);
        assert_eq!(m.matvec(&[1.0, 1.0]), vec![2.0, -1.0]);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = BandMatrix::new(3, 1, 1);
        assert!(matches!(band_solve(a, &[1.0, 0.0, 0.0]), Err(Error::LinearSolveFailure(_))));
    }
}

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NewtonStats {
    pub iterations: usize,
    pub residual: f64,
}

/// `max_i |r_i| / w_i`.
pub(crate) fn scaled_norm(r: &[f64], w: &[f64]) -> f64 {
    r.iter().zip(w).map(|(a, b)| (a / b).abs()).fold(0.0, f64::max)
}

/// Damped Newton with backtracking on the scaled max-norm.
///
/// `solve(x, r)` returns the correction `dx` with `J(x) dx = -r`. Trial points whose residual
/// evaluation fails are treated as rejected.
pub(crate) fn newton(
    block: &'static str,
    mut x: Vec<f64>,
    weights: &[f64],
    tol: f64,
    max_it: usize,
    mut residual: impl FnMut(&[f64]) -> Result<Vec<f64>, Error>,
    mut solve: impl FnMut(&[f64], &[f64]) -> Result<Vec<f64>, Error>,
) -> Result<(Vec<f64>, NewtonStats), Error> {
    let mut r = residual(&x)?;
    let mut norm = scaled_norm(&r, weights);
    let mut it = 0;
    while norm > tol {
        if it == max_it {
            return Err(Error::NewtonDivergence { block, iterations: it, residual: norm });
        }
        it += 1;
        let dx = solve(&x, &r)?;
        let mut s = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let xt: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + s * b).collect();
            if let Ok(rt) = residual(&xt) {
                let nt = scaled_norm(&rt, weights);
                if nt.is_finite() && (nt <= (1.0 - 1e-4 * s) * norm || nt <= tol) {
                    x = xt;
                    r = rt;
                    norm = nt;
                    accepted = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if !accepted {
            return Err(Error::NewtonDivergence { block, iterations: it, residual: norm });
        }
    }
    Ok((x, NewtonStats { iterations: it, residual: norm }))
}

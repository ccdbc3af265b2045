use crate::error::Error;

/// Search box for [`brute_force_minimize`]. Faces flagged in `constrained` are genuine bounds of the
/// problem; a minimizer on any other face means the box was chosen too small.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub constrained: Vec<bool>,
}

impl SearchBox {
    pub fn free(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        let n = lo.len();
        SearchBox { lo, hi, constrained: vec![false; n] }
    }
}

fn grid_search(f: &impl Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64], points: usize) -> (Vec<f64>, f64) {
    let n = lo.len();
    let total = points.pow(n as u32);
    let mut x = vec![0.0; n];
    let mut best = (lo.to_vec(), f64::INFINITY);
    for idx in 0..total {
        let mut r = idx;
        for k in 0..n {
            let j = r % points;
            r /= points;
            x[k] = lo[k] + (hi[k] - lo[k]) * j as f64 / (points - 1) as f64;
        }
        let v = f(&x);
        if v < best.1 {
            best = (x.clone(), v);
        }
    }
    best
}

/// Exhaustive tensor-grid minimization with `levels` zoom passes around the incumbent.
///
/// Each pass searches `points` values per coordinate; the next pass searches two grid cells on either
/// side of the best point. Intended for at most six unknowns.
pub fn brute_force_minimize(
    f: impl Fn(&[f64]) -> f64,
    bx: &SearchBox,
    points: usize,
    levels: usize,
) -> Result<Vec<f64>, Error> {
    let n = bx.lo.len();
    assert!(n <= 6 && points >= 3, "grid search supports at most six unknowns");
    let mut lo = bx.lo.clone();
    let mut hi = bx.hi.clone();
    let mut best = grid_search(&f, &lo, &hi, points);
    for _ in 0..levels {
        for k in 0..n {
            let h = (hi[k] - lo[k]) / (points - 1) as f64;
            lo[k] = (best.0[k] - 2.0 * h).max(bx.lo[k]);
            hi[k] = (best.0[k] + 2.0 * h).min(bx.hi[k]);
        }
        let cand = grid_search(&f, &lo, &hi, points);
        if cand.1 <= best.1 {
            best = cand;
        }
    }
    for k in 0..n {
        let on_face = best.0[k] <= bx.lo[k] || best.0[k] >= bx.hi[k];
        if on_face && !bx.constrained[k] {
            return Err(Error::SearchBoxTooSmall { coordinate: k });
        }
    }
    Ok(best.0)
}

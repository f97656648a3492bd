//! Barycentric Lagrange interpolation.

use crate::error::{Error, Result};
use faer::{c64, Mat};

/// Barycentric weights `1 / prod_{k != j} (x_j - x_k)` for distinct nodes.
pub fn barycentric_weights(nodes: &[f64]) -> Result<Vec<f64>> {
    let n = nodes.len();
    let scale = nodes.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    let mut w = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k == j {
                continue;
            }
            let d = nodes[j] - nodes[k];
            if d.abs() <= 4.0 * f64::EPSILON * scale {
                return Err(Error::DuplicateNodes(j.min(k), j.max(k)));
            }
            w[j] *= d;
        }
    }
    for v in &mut w {
        *v = 1.0 / *v;
    }
    Ok(w)
}

/// Row of interpolation coefficients at `x` (barycentric second form).
pub fn lagrange_row(nodes: &[f64], weights: &[f64], x: f64) -> Vec<f64> {
    let mut row = vec![0.0; nodes.len()];
    if let Some(k) = nodes.iter().position(|&t| t == x) {
        row[k] = 1.0;
        return row;
    }
    let mut denom = 0.0;
    for (j, (&t, &w)) in nodes.iter().zip(weights).enumerate() {
        let c = w / (x - t);
        row[j] = c;
        denom += c;
    }
    for v in &mut row {
        *v /= denom;
    }
    row
}

/// Matrix mapping samples on `src` to values of the interpolating
/// polynomial at `dst`. Exact for polynomials of degree `< src.len()`.
pub fn lagrange_interp_matrix(src: &[f64], dst: &[f64]) -> Result<Mat<f64>> {
    let w = barycentric_weights(src)?;
    let mut m = Mat::<f64>::zeros(dst.len(), src.len());
    for (i, &x) in dst.iter().enumerate() {
        for (j, v) in lagrange_row(src, &w, x).into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

/// Evaluates the interpolant of complex samples at `x`.
pub fn barycentric_eval(nodes: &[f64], weights: &[f64], values: &[c64], x: f64) -> c64 {
    let mut num = c64::new(0.0, 0.0);
    let mut den = 0.0;
    for ((&t, &w), &v) in nodes.iter().zip(weights).zip(values) {
        if t == x {
            return v;
        }
        let c = w / (x - t);
        num += v * c;
        den += c;
    }
    num / den
}

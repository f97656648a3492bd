//! Chebyshev extreme points and the spectral differentiation matrix.

use faer::Mat;
use std::f64::consts::PI;

/// Chebyshev points `x_j = cos(pi j / (p - 1))`, running from `1` down to `-1`,
/// with their barycentric weights `[1/2, -1, 1, ..., ±1/2]`.
#[derive(Clone, Debug)]
pub struct ChebyshevGrid1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ChebyshevGrid1D {
    pub fn new(p: usize) -> Self {
        assert!(p >= 2, "a Chebyshev grid needs at least two points");
        let m = (p - 1) as f64;
        let nodes = (0..p)
            .map(|j| {
                // sin form keeps the nodes exactly antisymmetric
                (PI * (m - 2.0 * j as f64) / (2.0 * m)).sin()
            })
            .collect();
        let weights = (0..p)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == p - 1 {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        ChebyshevGrid1D { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `p x p` differentiation matrix on Chebyshev points of an interval of
/// half-width `h`: off-diagonal `w_j / (w_i (x_i - x_j)) / h`, diagonal equal
/// to the negative off-diagonal row sum.
pub fn cheb_diff_matrix(p: usize, h: f64) -> Mat<f64> {
    assert!(h > 0.0, "half-width must be positive");
    let grid = ChebyshevGrid1D::new(p);
    let (x, w) = (&grid.nodes, &grid.weights);
    let mut d = Mat::<f64>::zeros(p, p);
    for i in 0..p {
        let mut row_sum = 0.0;
        for j in 0..p {
            if i != j {
                let v = w[j] / (w[i] * (x[i] - x[j]));
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        d[(i, i)] = -row_sum;
    }
    for i in 0..p {
        for j in 0..p {
            d[(i, j)] /= h;
        }
    }
    d
}

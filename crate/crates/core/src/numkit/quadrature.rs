//! Gauss–Legendre quadrature on `[-1, 1]`.
//!
//! Nodes are the roots of the Legendre polynomial `P_q`, located by Newton
//! iteration from Tricomi's asymptotic initial guesses. The three-term
//! recurrence gives `P_q` and `P_q'` at each iterate.

use std::f64::consts::PI;

/// Nodes and weights of a quadrature rule, nodes strictly increasing.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Affine image of a rule on `[-1, 1]` onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> QuadratureRule {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        QuadratureRule {
            nodes: self.nodes.iter().map(|&x| c + h * x).collect(),
            weights: self.weights.iter().map(|&w| h * w).collect(),
        }
    }
}

/// Evaluates `(P_q(x), P_{q-1}(x))`.
fn legendre_pair(q: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if q == 0 {
        return (1.0, 0.0);
    }
    for k in 1..q {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
    }
    (p, p_prev)
}

/// `q`-point Gauss–Legendre rule on `[-1, 1]`, exact for degree `2q - 1`.
///
/// Panics if `q == 0`.
pub fn gauss_legendre(q: usize) -> QuadratureRule {
    assert!(q >= 1, "gauss_legendre requires at least one node");
    let qf = q as f64;
    let half = q.div_ceil(2);
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..half {
        // Tricomi's initial guess for the i-th largest root.
        let theta = PI * (i as f64 + 0.75) / (qf + 0.5);
        let mut x = (1.0 - (qf - 1.0) / (8.0 * qf * qf * qf)) * theta.cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, pm1) = legendre_pair(q, x);
            dp = qf * (pm1 - x * p) / (1.0 - x * x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-15 {
                let (p, pm1) = legendre_pair(q, x);
                dp = qf * (pm1 - x * p) / (1.0 - x * x);
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[q - 1 - i] = x;
        nodes[i] = -x;
        weights[q - 1 - i] = w;
        weights[i] = w;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }
    QuadratureRule { nodes, weights }
}

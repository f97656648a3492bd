//! Nyström matrices of the Helmholtz single- and double-layer operators.
//!
//! `G(x, y) = (i/4) H0(κ|x - y|)`; the double layer uses `∂G/∂n_y`.
//! Panels at least one panel length from the target use the plain panel
//! rule. Closer panels (including the target's own) are integrated against
//! the panel's Lagrange basis on subintervals graded geometrically toward
//! the point of the panel nearest the target, which resolves both the
//! logarithmic singularity and the near-singular corner interactions.

use super::mesh::{BoundaryMesh, Panel};
use crate::numkit::linalg::CMat;
use crate::numkit::{gauss_legendre, hankel01, lagrange_row, QuadratureRule};
use faer::c64;
use rayon::prelude::*;
use std::sync::OnceLock;

/// Grading ratio of the subintervals.
const GRADE: f64 = 0.25;
/// Gauss points per subinterval.
const SUB_ORDER: usize = 16;
/// Panels closer than this many panel lengths use the graded rule.
const NEAR: f64 = 1.0;

fn sub_rule() -> &'static QuadratureRule {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(SUB_ORDER))
}

/// `(G, ∂G/∂n_y)` at target `x`, source `y` with normal `ny`.
#[inline]
pub fn kernels(kappa: f64, x: [f64; 2], y: [f64; 2], ny: [f64; 2]) -> (c64, c64) {
    kernels_at(kappa, [x[0] - y[0], x[1] - y[1]], ny)
}

/// Kernels from the separation `x - y`.
#[inline]
fn kernels_at(kappa: f64, sep: [f64; 2], ny: [f64; 2]) -> (c64, c64) {
    let [dx, dy] = sep;
    let r = (dx * dx + dy * dy).sqrt();
    let (h0, h1) = hankel01(kappa * r);
    let g = c64::new(0.0, 0.25) * h0;
    let d = c64::new(0.0, 0.25 * kappa) * h1 * ((dx * ny[0] + dy * ny[1]) / r);
    (g, d)
}

#[derive(Clone, Debug)]
pub struct LayerOperators {
    pub kappa: f64,
    pub s: CMat,
    pub d: CMat,
}

/// Subintervals of `[-1, 1]` graded toward `c`, as offsets from `c`,
/// stopping once a piece is shorter than `stop`. Offsets are exact
/// multiples of the two side lengths, so sources close to `c` keep full
/// relative precision.
fn graded_pieces(c: f64, stop: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for side in [-1.0 - c, 1.0 - c] {
        if side == 0.0 {
            continue;
        }
        let mut outer = side;
        while outer.abs() > stop {
            let inner = outer * GRADE;
            out.push((outer.min(inner), outer.max(inner)));
            outer = inner;
        }
        out.push((outer.min(0.0), outer.max(0.0)));
    }
    out
}

/// Integrals of `G` and `∂G/∂n_y` against each Lagrange basis function of
/// `panel`, for a target close to it.
pub fn near_weights(mesh: &BoundaryMesh, panel: &Panel, kappa: f64, x: [f64; 2]) -> (Vec<c64>, Vec<c64>) {
    let order = mesh.order();
    let (c, dist) = panel.project(x);
    let q = panel.point(c);
    let base = [x[0] - q[0], x[1] - q[1]];
    // half tangent: d y / d s
    let tan = [0.5 * (panel.b[0] - panel.a[0]), 0.5 * (panel.b[1] - panel.a[1])];
    let stop = (2.0 * dist / panel.len).max(1e-15);
    let rule = sub_rule();
    let mut ws = vec![c64::new(0.0, 0.0); order];
    let mut wd = vec![c64::new(0.0, 0.0); order];
    for (a, b) in graded_pieces(c, stop) {
        let h = 0.5 * (b - a);
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let off = a + h * (1.0 + t);
            let sep = [base[0] - off * tan[0], base[1] - off * tan[1]];
            if sep == [0.0, 0.0] {
                continue;
            }
            let (g, d) = kernels_at(kappa, sep, panel.normal);
            let basis = lagrange_row(&mesh.rule.nodes, &mesh.rule_bary, c + off);
            let ds = w * h * 0.5 * panel.len;
            for j in 0..order {
                let f = basis[j] * ds;
                ws[j] += g * f;
                wd[j] += d * f;
            }
        }
    }
    (ws, wd)
}

/// Assembles `S` and `D` on the mesh nodes.
pub fn layer_matrices(mesh: &BoundaryMesh, kappa: f64) -> LayerOperators {
    let n = mesh.len();
    let order = mesh.order();
    let rows: Vec<(Vec<c64>, Vec<c64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = mesh.nodes[i];
            let mut srow = vec![c64::new(0.0, 0.0); n];
            let mut drow = vec![c64::new(0.0, 0.0); n];
            for p in &mesh.panels {
                let (_, dist) = p.project(x);
                if dist < NEAR * p.len {
                    let (ws, wd) = near_weights(mesh, p, kappa, x);
                    srow[p.first..p.first + order].copy_from_slice(&ws);
                    drow[p.first..p.first + order].copy_from_slice(&wd);
                } else {
                    for j in p.first..p.first + order {
                        let (g, d) = kernels(kappa, x, mesh.nodes[j], p.normal);
                        srow[j] = g * mesh.weights[j];
                        drow[j] = d * mesh.weights[j];
                    }
                }
            }
            (srow, drow)
        })
        .collect();
    let mut s = CMat::zeros(n, n);
    let mut d = CMat::zeros(n, n);
    for (i, (sr, dr)) in rows.into_iter().enumerate() {
        for j in 0..n {
            s[(i, j)] = sr[j];
            d[(i, j)] = dr[j];
        }
    }
    LayerOperators { kappa, s, d }
}

/// `D[φ](x) - S[ψ](x)` at off-boundary points. Panels within one panel
/// length of a target use the graded rule, so the representation stays
/// accurate arbitrarily close to the boundary.
pub fn green_representation(mesh: &BoundaryMesh, kappa: f64, phi: &[c64], psi: &[c64], points: &[[f64; 2]]) -> Vec<c64> {
    let order = mesh.order();
    points
        .par_iter()
        .map(|&x| {
            let mut acc = c64::new(0.0, 0.0);
            for p in &mesh.panels {
                let (_, dist) = p.project(x);
                let idx = p.first..p.first + order;
                if dist < NEAR * p.len {
                    let (ws, wd) = near_weights(mesh, p, kappa, x);
                    for (k, j) in idx.enumerate() {
                        acc += wd[k] * phi[j] - ws[k] * psi[j];
                    }
                } else {
                    for j in idx {
                        let (g, d) = kernels(kappa, x, mesh.nodes[j], p.normal);
                        acc += (d * phi[j] - g * psi[j]) * mesh.weights[j];
                    }
                }
            }
            acc
        })
        .collect()
}

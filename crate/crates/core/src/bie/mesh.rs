//! Panel discretization of the boundary of the square domain.
//!
//! Panels coincide with the leaf edges on the boundary, except that the two
//! leaf edges touching each corner are split dyadically toward the corner.
//! Nodes run counter-clockwise from the south-west corner, the same order as
//! the Gauss nodes of the merge tree's root box.

use crate::numkit::{barycentric_weights, gauss_legendre, lagrange_row, QuadratureRule};
use crate::quadtree::BoxTree;
use faer::Mat;

pub const PANEL_ORDER: usize = 10;
pub const CORNER_LEVELS: usize = 6;

#[derive(Clone, Debug)]
pub struct Panel {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub len: f64,
    /// Outward unit normal.
    pub normal: [f64; 2],
    /// Position of the containing leaf edge along the boundary.
    pub leaf_edge: usize,
    /// Extent inside the leaf edge's parameter range `[-1, 1]`.
    pub t_range: (f64, f64),
    /// Index of the panel's first node.
    pub first: usize,
}

impl Panel {
    /// Point at panel parameter `x` in `[-1, 1]`.
    pub fn point(&self, x: f64) -> [f64; 2] {
        let s = 0.5 * (1.0 + x);
        [self.a[0] + s * (self.b[0] - self.a[0]), self.a[1] + s * (self.b[1] - self.a[1])]
    }

    /// Closest panel parameter (clamped to `[-1, 1]`) and distance to `p`.
    pub fn project(&self, p: [f64; 2]) -> (f64, f64) {
        let (dx, dy) = (self.b[0] - self.a[0], self.b[1] - self.a[1]);
        let s = ((p[0] - self.a[0]) * dx + (p[1] - self.a[1]) * dy) / (self.len * self.len);
        let x = (2.0 * s - 1.0).clamp(-1.0, 1.0);
        let q = self.point(x);
        (x, ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt())
    }
}

#[derive(Clone, Debug)]
pub struct BoundaryMesh {
    pub panels: Vec<Panel>,
    pub nodes: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub normals: Vec<[f64; 2]>,
    /// Counter-clockwise arclength from the south-west corner.
    pub arc: Vec<f64>,
    /// Reference Gauss rule on `[-1, 1]` used on every panel.
    pub rule: QuadratureRule,
    pub rule_bary: Vec<f64>,
    /// Leaf edges per side.
    pub edges_per_side: usize,
    pub leaf_size: f64,
    pub domain: [f64; 4],
}

/// Start point, unit tangent and outward normal of side `k` (south, east, north, west).
fn side_frame(domain: [f64; 4], k: usize) -> ([f64; 2], [f64; 2], [f64; 2]) {
    let [x0, x1, y0, y1] = domain;
    match k {
        0 => ([x0, y0], [1.0, 0.0], [0.0, -1.0]),
        1 => ([x1, y0], [0.0, 1.0], [1.0, 0.0]),
        2 => ([x1, y1], [-1.0, 0.0], [0.0, 1.0]),
        _ => ([x0, y1], [0.0, -1.0], [-1.0, 0.0]),
    }
}

/// Breakpoints in `[-1, 1]` for a leaf edge, graded toward the ends that touch a corner.
fn breakpoints(start_corner: bool, end_corner: bool, levels: usize) -> Vec<f64> {
    let mut pts = vec![-1.0, 1.0];
    for j in 1..=levels {
        let d = 2.0 * 0.5f64.powi(j as i32);
        if start_corner {
            pts.push(-1.0 + d);
        }
        if end_corner {
            pts.push(1.0 - d);
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    pts
}

pub fn build_boundary_mesh(tree: &BoxTree) -> BoundaryMesh {
    build_boundary_mesh_with(tree, PANEL_ORDER, CORNER_LEVELS)
}

/// Mesh with `order` nodes per panel and `levels` dyadic corner refinements.
pub fn build_boundary_mesh_with(tree: &BoxTree, order: usize, levels: usize) -> BoundaryMesh {
    let rule = gauss_legendre(order);
    let rule_bary = barycentric_weights(&rule.nodes).expect("Gauss nodes are distinct");
    let s = tree.side;
    let h = tree.leaf_size;
    let side_len = h * s as f64;
    let mut mesh = BoundaryMesh {
        panels: Vec::new(),
        nodes: Vec::new(),
        weights: Vec::new(),
        normals: Vec::new(),
        arc: Vec::new(),
        rule,
        rule_bary,
        edges_per_side: s,
        leaf_size: h,
        domain: tree.domain,
    };
    for side in 0..4 {
        let (p0, tau, normal) = side_frame(tree.domain, side);
        for k in 0..s {
            let bps = breakpoints(k == 0, k + 1 == s, levels);
            for w in bps.windows(2) {
                let (ta, tb) = (w[0], w[1]);
                let at = |t: f64| {
                    let d = h * (k as f64 + 0.5 * (1.0 + t));
                    [p0[0] + d * tau[0], p0[1] + d * tau[1]]
                };
                let panel = Panel {
                    a: at(ta),
                    b: at(tb),
                    len: 0.5 * h * (tb - ta),
                    normal,
                    leaf_edge: side * s + k,
                    t_range: (ta, tb),
                    first: mesh.nodes.len(),
                };
                for (x, wq) in mesh.rule.nodes.iter().zip(&mesh.rule.weights) {
                    let t = ta + 0.5 * (tb - ta) * (1.0 + x);
                    mesh.nodes.push(at(t));
                    mesh.weights.push(0.5 * panel.len * wq);
                    mesh.normals.push(normal);
                    mesh.arc.push(side as f64 * side_len + h * (k as f64 + 0.5 * (1.0 + t)));
                }
                mesh.panels.push(panel);
            }
        }
    }
    mesh
}

impl BoundaryMesh {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn order(&self) -> usize {
        self.rule.len()
    }

    /// Index of the panel containing node `i`.
    pub fn panel_of(&self, i: usize) -> usize {
        // panels are contiguous blocks of equal size
        i / self.order()
    }

    pub fn perimeter(&self) -> f64 {
        self.panels.iter().map(|p| p.len).sum()
    }

    /// Interpolation from the tree's boundary Gauss nodes to the mesh nodes,
    /// edge by edge with degree `ng - 1`.
    pub fn gauss_to_nodes(&self, tree: &BoxTree) -> Mat<f64> {
        let ng = tree.ng;
        let g = &tree.gauss.nodes;
        let bw = barycentric_weights(g).expect("Gauss nodes are distinct");
        let mut m = Mat::<f64>::zeros(self.len(), 4 * ng * tree.side);
        for p in &self.panels {
            let (ta, tb) = p.t_range;
            for (q, x) in self.rule.nodes.iter().enumerate() {
                let t = ta + 0.5 * (tb - ta) * (1.0 + x);
                let row = lagrange_row(g, &bw, t);
                for (c, v) in row.into_iter().enumerate() {
                    m[(p.first + q, p.leaf_edge * ng + c)] = v;
                }
            }
        }
        m
    }

    /// Interpolation from the mesh nodes to the tree's boundary Gauss nodes,
    /// using the nodes of the panel that contains each Gauss node.
    pub fn nodes_to_gauss(&self, tree: &BoxTree) -> Mat<f64> {
        let ng = tree.ng;
        let order = self.order();
        let mut m = Mat::<f64>::zeros(4 * ng * tree.side, self.len());
        let mut by_edge: Vec<Vec<usize>> = vec![Vec::new(); 4 * tree.side];
        for (i, p) in self.panels.iter().enumerate() {
            by_edge[p.leaf_edge].push(i);
        }
        for (e, panels) in by_edge.iter().enumerate() {
            for (k, &t) in tree.gauss.nodes.iter().enumerate() {
                let &pi = panels
                    .iter()
                    .find(|&&pi| {
                        let (a, b) = self.panels[pi].t_range;
                        t >= a && t <= b
                    })
                    .expect("panels cover the leaf edge");
                let p = &self.panels[pi];
                let (a, b) = p.t_range;
                let x = 2.0 * (t - a) / (b - a) - 1.0;
                let row = lagrange_row(&self.rule.nodes, &self.rule_bary, x);
                for (q, v) in row.into_iter().enumerate().take(order) {
                    m[(e * ng + k, p.first + q)] = v;
                }
            }
        }
        m
    }

    /// Panel containing boundary point `p` (within `tol`) and its panel parameter.
    pub fn locate(&self, p: [f64; 2], tol: f64) -> Option<(usize, f64)> {
        self.panels
            .iter()
            .enumerate()
            .map(|(i, pan)| {
                let (x, d) = pan.project(p);
                (i, x, d)
            })
            .filter(|&(_, _, d)| d <= tol)
            .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap())
            .map(|(i, x, _)| (i, x))
    }
}

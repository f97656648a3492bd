//! Binary merge tree over a `2^M x 2^M` lattice of square leaf boxes.
//!
//! Squares split into a south child and a north child across a horizontal
//! edge; the resulting 2:1 rectangles split into a west child and an east
//! child across a vertical edge. Nodes are numbered breadth-first, so a
//! parent always precedes its children and the root is node 0.
//!
//! Every leaf edge carries `ng` Gauss nodes with a global id. A box lists the
//! ids on its boundary counter-clockwise starting from the south-west
//! corner, which is the order used by all impedance operators.

use crate::error::{Error, Result};
use crate::numkit::{gauss_legendre, QuadratureRule};

/// A lattice edge of one leaf side length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeKey {
    /// From lattice point `(i, j)` to `(i + 1, j)`.
    Horizontal(usize, usize),
    /// From lattice point `(i, j)` to `(i, j + 1)`.
    Vertical(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    /// Children are stacked: south (alpha) below north (beta).
    SouthNorth,
    /// Children are side by side: west (alpha) and east (beta).
    WestEast,
}

#[derive(Clone, Debug)]
pub struct BoxNode {
    pub id: usize,
    pub level: usize,
    pub parent: Option<usize>,
    /// `[alpha, beta]`.
    pub children: Option<[usize; 2]>,
    pub split: Option<Split>,
    /// Lattice extent `[i0, i1, j0, j1]`, upper bounds exclusive.
    pub cells: [usize; 4],
    /// `[xmin, xmax, ymin, ymax]`.
    pub bounds: [f64; 4],
    /// Global Gauss-node ids on the boundary, counter-clockwise from the
    /// south-west corner.
    pub boundary: Vec<usize>,
}

impl BoxNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    /// One-based index, with the root at 1.
    pub fn tau(&self) -> usize {
        self.id + 1
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        let [x0, x1, y0, y1] = self.bounds;
        p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1
    }
}

/// Positions of the boundary data of two siblings relative to their parent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeIndexSets {
    /// Positions in alpha's boundary list that stay on the parent boundary.
    pub j1: Vec<usize>,
    /// Positions in beta's boundary list that stay on the parent boundary.
    pub j2: Vec<usize>,
    /// Shared-edge positions in alpha's list, in alpha's order.
    pub j3_alpha: Vec<usize>,
    /// Shared-edge positions in beta's list, matching `j3_alpha` point by point.
    pub j3_beta: Vec<usize>,
    /// For each parent boundary position, its index in the stacked `[J1; J2]` block.
    pub parent_order: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct BoxTree {
    pub levels: usize,
    pub ng: usize,
    /// `[xmin, xmax, ymin, ymax]` of the square domain.
    pub domain: [f64; 4],
    pub nodes: Vec<BoxNode>,
    pub gauss: QuadratureRule,
    /// Leaves per side.
    pub side: usize,
    /// Leaf side length.
    pub leaf_size: f64,
    leaf_lookup: Vec<usize>,
}

/// Builds the merge tree for a square domain `[xmin, xmax, ymin, ymax]`.
pub fn build_tree(domain: [f64; 4], levels: usize, ng: usize) -> Result<BoxTree> {
    let [x0, x1, y0, y1] = domain;
    let (w, h) = (x1 - x0, y1 - y0);
    if !(w > 0.0 && h > 0.0) || (w - h).abs() > 1e-14 * w.max(h) {
        return Err(Error::Config(format!("domain must be a non-degenerate square, got {domain:?}")));
    }
    if ng < 2 {
        return Err(Error::Config(format!("need at least 2 Gauss nodes per edge, got {ng}")));
    }
    if levels > 12 {
        return Err(Error::Config(format!("{levels} levels is beyond any supported problem size")));
    }
    let side = 1usize << levels;
    let leaf_size = w / side as f64;
    let mut tree = BoxTree {
        levels,
        ng,
        domain,
        nodes: Vec::with_capacity(2 * side * side - 1),
        gauss: gauss_legendre(ng),
        side,
        leaf_size,
        leaf_lookup: vec![usize::MAX; side * side],
    };
    let root = tree.make_node(0, None, [0, side, 0, side]);
    tree.nodes.push(root);
    let mut next = 0;
    while next < tree.nodes.len() {
        let [i0, i1, j0, j1] = tree.nodes[next].cells;
        let (wi, hj) = (i1 - i0, j1 - j0);
        if wi == 1 && hj == 1 {
            tree.leaf_lookup[j0 * side + i0] = next;
            next += 1;
            continue;
        }
        let level = tree.nodes[next].level + 1;
        let (split, a, b) = if wi == hj {
            let jm = j0 + hj / 2;
            (Split::SouthNorth, [i0, i1, j0, jm], [i0, i1, jm, j1])
        } else {
            let im = i0 + wi / 2;
            (Split::WestEast, [i0, im, j0, j1], [im, i1, j0, j1])
        };
        let ia = tree.nodes.len();
        let na = tree.make_node(level, Some(next), a);
        tree.nodes.push(na);
        let nb = tree.make_node(level, Some(next), b);
        tree.nodes.push(nb);
        tree.nodes[next].children = Some([ia, ia + 1]);
        tree.nodes[next].split = Some(split);
        next += 1;
    }
    Ok(tree)
}

impl BoxTree {
    fn make_node(&self, level: usize, parent: Option<usize>, cells: [usize; 4]) -> BoxNode {
        let [i0, i1, j0, j1] = cells;
        let h = self.leaf_size;
        let bounds = [
            self.domain[0] + h * i0 as f64,
            self.domain[0] + h * i1 as f64,
            self.domain[2] + h * j0 as f64,
            self.domain[2] + h * j1 as f64,
        ];
        BoxNode {
            id: self.nodes.len(),
            level,
            parent,
            children: None,
            split: None,
            cells,
            bounds,
            boundary: self.boundary_ids(cells),
        }
    }

    /// Lattice edges around a lattice box, counter-clockwise, each with a
    /// flag telling whether it is traversed against its own orientation.
    pub fn boundary_edges(&self, cells: [usize; 4]) -> Vec<(EdgeKey, bool)> {
        let [i0, i1, j0, j1] = cells;
        let mut e = Vec::with_capacity(2 * (i1 - i0 + j1 - j0));
        e.extend((i0..i1).map(|i| (EdgeKey::Horizontal(i, j0), false)));
        e.extend((j0..j1).map(|j| (EdgeKey::Vertical(i1, j), false)));
        e.extend((i0..i1).rev().map(|i| (EdgeKey::Horizontal(i, j1), true)));
        e.extend((j0..j1).rev().map(|j| (EdgeKey::Vertical(i0, j), true)));
        e
    }

    fn boundary_ids(&self, cells: [usize; 4]) -> Vec<usize> {
        let ng = self.ng;
        let mut ids = Vec::new();
        for (edge, reversed) in self.boundary_edges(cells) {
            let base = self.edge_index(edge) * ng;
            if reversed {
                ids.extend((0..ng).rev().map(|k| base + k));
            } else {
                ids.extend((0..ng).map(|k| base + k));
            }
        }
        ids
    }

    pub fn edge_count(&self) -> usize {
        2 * self.side * (self.side + 1)
    }

    pub fn edge_index(&self, e: EdgeKey) -> usize {
        let n = self.side;
        match e {
            EdgeKey::Horizontal(i, j) => j * n + i,
            EdgeKey::Vertical(i, j) => n * (n + 1) + i * n + j,
        }
    }

    pub fn edge_key(&self, idx: usize) -> EdgeKey {
        let n = self.side;
        if idx < n * (n + 1) {
            EdgeKey::Horizontal(idx % n, idx / n)
        } else {
            let r = idx - n * (n + 1);
            EdgeKey::Vertical(r / n, r % n)
        }
    }

    /// Physical coordinates of a global Gauss-node id.
    pub fn node_coord(&self, gid: usize) -> [f64; 2] {
        let (edge, k) = (gid / self.ng, gid % self.ng);
        let h = self.leaf_size;
        let t = 0.5 * (1.0 + self.gauss.nodes[k]);
        match self.edge_key(edge) {
            EdgeKey::Horizontal(i, j) => {
                [self.domain[0] + h * (i as f64 + t), self.domain[2] + h * j as f64]
            }
            EdgeKey::Vertical(i, j) => {
                [self.domain[0] + h * i as f64, self.domain[2] + h * (j as f64 + t)]
            }
        }
    }

    pub fn root(&self) -> &BoxNode {
        &self.nodes[0]
    }

    pub fn leaf_count(&self) -> usize {
        self.side * self.side
    }

    pub fn leaves(&self) -> impl Iterator<Item = &BoxNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    /// Leaf node at lattice position `(i, j)`.
    pub fn leaf_at(&self, i: usize, j: usize) -> usize {
        self.leaf_lookup[j * self.side + i]
    }

    /// Leaf containing `p` (closed boxes; ties go to the lower index cell).
    pub fn locate_leaf(&self, p: [f64; 2]) -> Option<usize> {
        let [x0, x1, y0, y1] = self.domain;
        if !(p[0] >= x0 && p[0] <= x1 && p[1] >= y0 && p[1] <= y1) {
            return None;
        }
        let cell = |v: f64, lo: f64| (((v - lo) / self.leaf_size).floor().max(0.0) as usize).min(self.side - 1);
        Some(self.leaf_at(cell(p[0], x0), cell(p[1], y0)))
    }

    /// Number of Gauss nodes on the domain boundary, `4 ng 2^M`.
    pub fn boundary_node_count(&self) -> usize {
        4 * self.ng * self.side
    }

    /// Distinct Chebyshev points over all leaves for `nc` points per leaf side.
    pub fn interior_point_count(&self, nc: usize) -> usize {
        let m = self.side * (nc - 1) + 1;
        m * m
    }

    /// Nodes grouped by level, root level first.
    pub fn levels_top_down(&self) -> Vec<Vec<usize>> {
        let depth = self.nodes.iter().map(|n| n.level).max().unwrap_or(0);
        let mut out = vec![Vec::new(); depth + 1];
        for n in &self.nodes {
            out[n.level].push(n.id);
        }
        out
    }

    pub fn merge_index_sets(&self, parent: usize) -> Result<MergeIndexSets> {
        let node = &self.nodes[parent];
        let [a, b] = node
            .children
            .ok_or_else(|| Error::Config(format!("box {} is a leaf and has no merge", node.tau())))?;
        merge_index_sets(&self.nodes[a].boundary, &self.nodes[b].boundary, &node.boundary)
    }
}

/// Index sets for merging boxes with boundary id lists `alpha` and `beta`
/// into a box with boundary list `parent`.
pub fn merge_index_sets(alpha: &[usize], beta: &[usize], parent: &[usize]) -> Result<MergeIndexSets> {
    use std::collections::HashMap;
    let pos_b: HashMap<usize, usize> = beta.iter().enumerate().map(|(p, &g)| (g, p)).collect();
    let mut j1 = Vec::new();
    let mut j3_alpha = Vec::new();
    let mut j3_beta = Vec::new();
    for (p, g) in alpha.iter().enumerate() {
        match pos_b.get(g) {
            Some(&q) => {
                j3_alpha.push(p);
                j3_beta.push(q);
            }
            None => j1.push(p),
        }
    }
    let shared: std::collections::HashSet<usize> = j3_beta.iter().copied().collect();
    let j2: Vec<usize> = (0..beta.len()).filter(|q| !shared.contains(q)).collect();

    let mut block: HashMap<usize, usize> = HashMap::new();
    for (k, &p) in j1.iter().enumerate() {
        block.insert(alpha[p], k);
    }
    for (k, &q) in j2.iter().enumerate() {
        block.insert(beta[q], j1.len() + k);
    }
    if block.len() != parent.len() {
        return Err(Error::Dimension(format!(
            "children expose {} exterior nodes but the parent boundary has {}",
            block.len(),
            parent.len()
        )));
    }
    let parent_order = parent
        .iter()
        .map(|g| {
            block
                .get(g)
                .copied()
                .ok_or_else(|| Error::Dimension(format!("parent boundary node {g} not found in children")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MergeIndexSets { j1, j2, j3_alpha, j3_beta, parent_order })
}

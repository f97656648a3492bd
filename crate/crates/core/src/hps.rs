//! Hierarchical merge of impedance-to-impedance maps.
//!
//! The upward sweep builds a leaf map for every leaf box and merges sibling
//! maps up the tree, keeping the operators that the downward sweep needs to
//! reconstruct the solution from incoming impedance data on the domain
//! boundary. The root map gives the interior Dirichlet-to-Neumann map.
//!
//! Merge notation: a parent with children α and β. `J1` are the boundary
//! nodes of α that stay on the parent boundary, `J2` those of β, and `J3` the
//! shared edge. Incoming data is `s`, outgoing data `w`. On the shared edge
//! the outward normals are opposite, so `w3α = -s3β` and `s3α = -w3β`.

use crate::error::{Error, Result};
use crate::leaf::{LeafBuilder, LeafGrid};
use crate::numkit::linalg::{cond_one_estimate, norm_2, eigenvalues, select, CMat, Lu};
use crate::potentials::ScatteringPotential;
use crate::quadtree::{BoxTree, MergeIndexSets};
use faer::{c64, Mat, MatRef};
use rayon::prelude::*;

pub const DEFAULT_DTN_THRESHOLD: f64 = 1e8;
pub const DEFAULT_MERGE_THRESHOLD: f64 = 1e12;

/// Solve operators of one merge: both map the parent's incoming data,
/// stacked as `[s1; s2]`, to incoming data on the shared edge.
#[derive(Clone, Debug)]
pub struct MergeOperators {
    pub s_alpha: CMat,
    pub s_beta: CMat,
}

/// Result of one merge, with `r` in the stacked `[J1; J2]` ordering.
#[derive(Clone, Debug)]
pub struct Merged {
    pub r: CMat,
    pub ops: MergeOperators,
    /// Condition estimate of `I - R33β R33α`.
    pub condition: f64,
}

/// Merges two child maps. `node` only labels the error.
pub fn merge_iti(
    ra: MatRef<'_, c64>,
    rb: MatRef<'_, c64>,
    sets: &MergeIndexSets,
    threshold: f64,
    node: usize,
) -> Result<Merged> {
    let MergeIndexSets { j1, j2, j3_alpha: j3a, j3_beta: j3b, .. } = sets;
    if ra.nrows() != ra.ncols() || ra.nrows() != j1.len() + j3a.len() {
        return Err(Error::Dimension(format!("alpha map is {}x{}", ra.nrows(), ra.ncols())));
    }
    if rb.nrows() != rb.ncols() || rb.nrows() != j2.len() + j3b.len() {
        return Err(Error::Dimension(format!("beta map is {}x{}", rb.nrows(), rb.ncols())));
    }
    let (n1, n2, n3) = (j1.len(), j2.len(), j3a.len());

    let r11a = select(ra, j1, j1);
    let r13a = select(ra, j1, j3a);
    let r31a = select(ra, j3a, j1);
    let r33a = select(ra, j3a, j3a);
    let r22b = select(rb, j2, j2);
    let r23b = select(rb, j2, j3b);
    let r32b = select(rb, j3b, j2);
    let r33b = select(rb, j3b, j3b);

    let mut m = -(&r33b * &r33a);
    for i in 0..n3 {
        m[(i, i)] += c64::new(1.0, 0.0);
    }
    let lu = Lu::new(m.as_ref()).map_err(|_| Error::MergeResonance { node, condition: f64::INFINITY })?;
    let condition = cond_one_estimate(m.as_ref(), &lu);
    if !(condition <= threshold) {
        return Err(Error::MergeResonance { node, condition });
    }

    // X = W [R33β R31α | R32β], one solve for both blocks.
    let t = &r33b * &r31a;
    let mut rhs = CMat::zeros(n3, n1 + n2);
    rhs.as_mut().submatrix_mut(0, 0, n3, n1).copy_from(&t);
    rhs.as_mut().submatrix_mut(0, n1, n3, n2).copy_from(&r32b);
    let x = lu.solve(rhs.as_ref());
    let xa = x.as_ref().submatrix(0, 0, n3, n1);
    let xb = x.as_ref().submatrix(0, n1, n3, n2);

    let z1 = &r31a + &r33a * xa;
    let z2 = -(&r33a * xb);

    let mut s_alpha = CMat::zeros(n3, n1 + n2);
    s_alpha.as_mut().submatrix_mut(0, 0, n3, n1).copy_from(xa);
    s_alpha.as_mut().submatrix_mut(0, n1, n3, n2).copy_from(-xb);
    let mut s_beta = CMat::zeros(n3, n1 + n2);
    s_beta.as_mut().submatrix_mut(0, 0, n3, n1).copy_from(-&z1);
    s_beta.as_mut().submatrix_mut(0, n1, n3, n2).copy_from(-&z2);

    let mut r = CMat::zeros(n1 + n2, n1 + n2);
    r.as_mut().submatrix_mut(0, 0, n1, n1).copy_from(&r11a + &r13a * xa);
    r.as_mut().submatrix_mut(0, n1, n1, n2).copy_from(-(&r13a * xb));
    r.as_mut().submatrix_mut(n1, 0, n2, n1).copy_from(-(&r23b * &z1));
    r.as_mut().submatrix_mut(n1, n1, n2, n2).copy_from(&r22b - &r23b * &z2);

    Ok(Merged { r, ops: MergeOperators { s_alpha, s_beta }, condition })
}

/// Reorders a stacked `[J1; J2]` map into the parent's boundary ordering.
pub fn to_parent_order(stacked: MatRef<'_, c64>, parent_order: &[usize]) -> CMat {
    select(stacked, parent_order, parent_order)
}

/// Which solve operators the sweep keeps for the downward pass.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum Retain {
    /// Every leaf and every merge.
    #[default]
    All,
    /// Nothing; the solver can produce the DtN map but no interior values.
    None,
    /// Only the listed leaves (node ids) and the merges above them.
    Leaves(Vec<usize>),
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    /// Chebyshev points per leaf side.
    pub nc: usize,
    /// Impedance parameter; defaults to κ.
    pub eta: Option<f64>,
    pub retain: Retain,
    /// Keep the map `R` of every node for diagnostics.
    pub keep_node_maps: bool,
    /// Recover the DtN map at the end of the sweep.
    pub compute_dtn: bool,
    pub dtn_threshold: f64,
    pub merge_threshold: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            nc: 16,
            eta: None,
            retain: Retain::All,
            keep_node_maps: false,
            compute_dtn: true,
            dtn_threshold: DEFAULT_DTN_THRESHOLD,
            merge_threshold: DEFAULT_MERGE_THRESHOLD,
        }
    }
}

/// Interior DtN map recovered from the root map.
#[derive(Clone, Debug)]
pub struct Dtn {
    pub t: CMat,
    /// Condition estimate of `R - I`.
    pub condition: f64,
}

/// `T = -iη (R - I)^{-1} (R + I)`, refused when `R - I` is too ill-conditioned.
pub fn iti_to_dtn(r: MatRef<'_, c64>, eta: f64, threshold: f64) -> Result<Dtn> {
    if r.nrows() != r.ncols() {
        return Err(Error::Dimension(format!("ItI map is {}x{}", r.nrows(), r.ncols())));
    }
    let n = r.nrows();
    let mut rm = r.to_owned();
    let mut rp = r.to_owned();
    for i in 0..n {
        rm[(i, i)] -= c64::new(1.0, 0.0);
        rp[(i, i)] += c64::new(1.0, 0.0);
    }
    let lu = match Lu::new(rm.as_ref()) {
        Ok(lu) => lu,
        Err(_) => return Err(Error::DomainResonance { condition: f64::INFINITY, threshold }),
    };
    let condition = cond_one_estimate(rm.as_ref(), &lu);
    if !(condition <= threshold) {
        return Err(Error::DomainResonance { condition, threshold });
    }
    let t = lu.solve(rp.as_ref()) * faer::Scale(c64::new(0.0, -eta));
    Ok(Dtn { t, condition })
}

/// Result of the upward sweep.
#[derive(Debug)]
pub struct HierarchySolver {
    pub tree: BoxTree,
    pub nc: usize,
    pub kappa: f64,
    pub eta: f64,
    /// Root map on the domain boundary Gauss nodes.
    pub r_top: CMat,
    pub dtn: Option<Dtn>,
    /// Largest merge condition estimate seen.
    pub max_merge_condition: f64,
    grid: LeafGrid,
    leaf_y: Vec<Option<CMat>>,
    merges: Vec<Option<(MergeIndexSets, MergeOperators)>>,
    node_maps: Option<Vec<CMat>>,
}

/// Marks the nodes whose operators the downward pass needs.
fn retained_nodes(tree: &BoxTree, retain: &Retain) -> Result<Vec<bool>> {
    let n = tree.nodes.len();
    match retain {
        Retain::All => Ok(vec![true; n]),
        Retain::None => Ok(vec![false; n]),
        Retain::Leaves(ids) => {
            let mut keep = vec![false; n];
            for &id in ids {
                if id >= n || !tree.nodes[id].is_leaf() {
                    return Err(Error::Config(format!("node {id} is not a leaf of the tree")));
                }
                let mut cur = Some(id);
                while let Some(c) = cur {
                    keep[c] = true;
                    cur = tree.nodes[c].parent;
                }
            }
            Ok(keep)
        }
    }
}

/// Upward sweep: leaf maps, then merges level by level up to the root.
pub fn build_sweep(
    tree: BoxTree,
    pot: &ScatteringPotential,
    kappa: f64,
    config: &SweepConfig,
) -> Result<HierarchySolver> {
    let eta = config.eta.unwrap_or(kappa);
    let ng = tree.ng;
    let builder = LeafBuilder::new(config.nc, ng, 0.5 * tree.leaf_size, kappa, eta)?;
    let keep = retained_nodes(&tree, &config.retain)?;
    let n = tree.nodes.len();

    let leaf_ids: Vec<usize> = tree.leaves().map(|l| l.id).collect();
    // Unretained Y matrices are dropped as soon as each leaf is built.
    let built: Vec<(usize, Result<(CMat, Option<CMat>)>)> = leaf_ids
        .par_iter()
        .map(|&id| (id, builder.build(tree.nodes[id].bounds, pot).map(|ops| (ops.r, keep[id].then_some(ops.y)))))
        .collect();

    let mut maps: Vec<Option<CMat>> = (0..n).map(|_| None).collect();
    let mut leaf_y: Vec<Option<CMat>> = (0..n).map(|_| None).collect();
    for (id, ops) in built {
        let (r, y) = ops?;
        maps[id] = Some(r);
        leaf_y[id] = y;
    }

    let mut merges: Vec<Option<(MergeIndexSets, MergeOperators)>> = (0..n).map(|_| None).collect();
    let mut node_maps: Option<Vec<CMat>> = config.keep_node_maps.then(|| vec![CMat::zeros(0, 0); n]);
    let mut max_cond = 0.0f64;

    let levels = tree.levels_top_down();
    for level in levels.iter().rev() {
        let parents: Vec<usize> = level.iter().copied().filter(|&id| !tree.nodes[id].is_leaf()).collect();
        if parents.is_empty() {
            continue;
        }
        let mut inputs = Vec::with_capacity(parents.len());
        for &p in &parents {
            let [a, b] = tree.nodes[p].children.expect("parent has children");
            let ra = maps[a].take().expect("child map present");
            let rb = maps[b].take().expect("child map present");
            if let Some(store) = node_maps.as_mut() {
                store[a] = ra.clone();
                store[b] = rb.clone();
            }
            inputs.push((p, ra, rb));
        }
        let results: Vec<Result<(usize, CMat, MergeIndexSets, MergeOperators, f64)>> = inputs
            .into_par_iter()
            .map(|(p, ra, rb)| {
                let sets = tree.merge_index_sets(p)?;
                let m = merge_iti(ra.as_ref(), rb.as_ref(), &sets, config.merge_threshold, tree.nodes[p].tau())?;
                let r = to_parent_order(m.r.as_ref(), &sets.parent_order);
                Ok((p, r, sets, m.ops, m.condition))
            })
            .collect();
        for res in results {
            let (p, r, sets, ops, cond) = res?;
            max_cond = max_cond.max(cond);
            maps[p] = Some(r);
            if keep[p] {
                merges[p] = Some((sets, ops));
            }
        }
    }

    let r_top = maps[0].take().expect("root map present");
    if let Some(store) = node_maps.as_mut() {
        store[0] = r_top.clone();
    }
    let dtn = if config.compute_dtn { Some(iti_to_dtn(r_top.as_ref(), eta, config.dtn_threshold)?) } else { None };
    Ok(HierarchySolver {
        tree,
        nc: config.nc,
        kappa,
        eta,
        r_top,
        dtn,
        max_merge_condition: max_cond,
        grid: builder.grid,
        leaf_y,
        merges,
        node_maps,
    })
}

/// Solution values on the tensor Chebyshev grid of each retained leaf.
#[derive(Clone, Debug)]
pub struct LeafValues {
    pub nc: usize,
    /// Indexed by node id; tensor order `i + nc j` within a leaf.
    pub values: Vec<Option<Vec<c64>>>,
}

impl LeafValues {
    pub fn leaf(&self, id: usize) -> Option<&[c64]> {
        self.values.get(id).and_then(|v| v.as_deref())
    }
}

impl HierarchySolver {
    pub fn leaf_grid(&self) -> &LeafGrid {
        &self.grid
    }

    /// `R` of node `id` when the sweep kept node maps.
    pub fn node_map(&self, id: usize) -> Option<&CMat> {
        self.node_maps.as_ref().map(|m| &m[id])
    }

    pub fn merge_operators(&self, id: usize) -> Option<&MergeOperators> {
        self.merges.get(id).and_then(|m| m.as_ref().map(|(_, ops)| ops))
    }

    /// Bytes held by the stored solve operators, the root map and the DtN map.
    pub fn operator_bytes(&self) -> usize {
        let size = |m: &CMat| m.nrows() * m.ncols() * std::mem::size_of::<c64>();
        let leaves: usize = self.leaf_y.iter().flatten().map(size).sum();
        let merges: usize = self.merges.iter().flatten().map(|(_, ops)| size(&ops.s_alpha) + size(&ops.s_beta)).sum();
        let maps: usize = self.node_maps.iter().flatten().map(size).sum();
        leaves + merges + maps + size(&self.r_top) + self.dtn.as_ref().map_or(0, |d| size(&d.t))
    }

    /// Whether the downward pass can produce values in leaf `id`.
    pub fn has_leaf(&self, id: usize) -> bool {
        self.leaf_y.get(id).is_some_and(|y| y.is_some())
    }

    /// Downward sweep for incoming impedance data `f` on the domain boundary.
    pub fn apply_downward(&self, f: &[c64]) -> Result<LeafValues> {
        let nb = self.tree.boundary_node_count();
        if f.len() != nb {
            return Err(Error::Dimension(format!("boundary data has length {}, expected {nb}", f.len())));
        }
        let n = self.tree.nodes.len();
        let mut incoming: Vec<Option<Vec<c64>>> = (0..n).map(|_| None).collect();
        let mut values: Vec<Option<Vec<c64>>> = (0..n).map(|_| None).collect();
        let root_needed = self.leaf_y.iter().any(|y| y.is_some());
        if root_needed {
            incoming[0] = Some(f.to_vec());
        }
        for id in 0..n {
            let Some(s) = incoming[id].take() else { continue };
            let node = &self.tree.nodes[id];
            match node.children {
                None => {
                    if let Some(y) = &self.leaf_y[id] {
                        let u = mat_vec_ref(y.as_ref(), &s);
                        let mut tensor = vec![c64::new(0.0, 0.0); u.len()];
                        for (k, &idx) in self.grid.order.iter().enumerate() {
                            tensor[idx] = u[k];
                        }
                        values[id] = Some(tensor);
                    }
                }
                Some([a, b]) => {
                    let Some((sets, ops)) = &self.merges[id] else { continue };
                    let mut stacked = vec![c64::new(0.0, 0.0); s.len()];
                    for (p, &k) in sets.parent_order.iter().enumerate() {
                        stacked[k] = s[p];
                    }
                    let s3a = mat_vec_ref(ops.s_alpha.as_ref(), &stacked);
                    let s3b = mat_vec_ref(ops.s_beta.as_ref(), &stacked);
                    let n1 = sets.j1.len();
                    let mut sa = vec![c64::new(0.0, 0.0); n1 + sets.j3_alpha.len()];
                    for (k, &p) in sets.j1.iter().enumerate() {
                        sa[p] = stacked[k];
                    }
                    for (k, &p) in sets.j3_alpha.iter().enumerate() {
                        sa[p] = s3a[k];
                    }
                    let mut sb = vec![c64::new(0.0, 0.0); sets.j2.len() + sets.j3_beta.len()];
                    for (k, &q) in sets.j2.iter().enumerate() {
                        sb[q] = stacked[n1 + k];
                    }
                    for (k, &q) in sets.j3_beta.iter().enumerate() {
                        sb[q] = s3b[k];
                    }
                    incoming[a] = Some(sa);
                    incoming[b] = Some(sb);
                }
            }
        }
        Ok(LeafValues { nc: self.nc, values })
    }
}

fn mat_vec_ref(a: MatRef<'_, c64>, x: &[c64]) -> Vec<c64> {
    let xm = Mat::from_fn(x.len(), 1, |i, _| x[i]);
    let y = a * &xm;
    (0..y.nrows()).map(|i| y[(i, 0)]).collect()
}

/// Outward unit normal at each position of the root boundary list.
pub fn boundary_normals(tree: &BoxTree) -> Vec<[f64; 2]> {
    let per_side = tree.ng * tree.side;
    (0..tree.boundary_node_count())
        .map(|p| match p / per_side {
            0 => [0.0, -1.0],
            1 => [1.0, 0.0],
            2 => [0.0, 1.0],
            _ => [-1.0, 0.0],
        })
        .collect()
}

/// Quadrature weights of the boundary Gauss nodes of box `id`.
pub fn boundary_weights(tree: &BoxTree, id: usize) -> Vec<f64> {
    let ng = tree.ng;
    let half = 0.5 * tree.leaf_size;
    tree.nodes[id].boundary.iter().map(|&g| half * tree.gauss.weights[g % ng]).collect()
}

/// How far a map is from unitary in the quadrature-weighted inner product.
#[derive(Clone, Copy, Debug)]
pub struct UnitarityReport {
    /// `| ||W^{1/2} R W^{-1/2}||_2 - 1 |`.
    pub norm_deviation: f64,
    /// Largest distance of an eigenvalue from the unit circle.
    pub eigen_deviation: f64,
}

pub fn unitarity(r: MatRef<'_, c64>, weights: &[f64]) -> Result<UnitarityReport> {
    let sq: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let rw = Mat::from_fn(r.nrows(), r.ncols(), |i, j| r[(i, j)] * (sq[i] / sq[j]));
    let norm_deviation = (norm_2(rw.as_ref())? - 1.0).abs();
    let eigen_deviation = eigenvalues(r)?.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    Ok(UnitarityReport { norm_deviation, eigen_deviation })
}

/// `||S - S^T||_2 / ||S||_2` for `S = W^{1/2} T W^{-1/2}`.
pub fn weighted_asymmetry(t: MatRef<'_, c64>, weights: &[f64]) -> Result<f64> {
    let sq: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let s = Mat::from_fn(t.nrows(), t.ncols(), |i, j| t[(i, j)] * (sq[i] / sq[j]));
    let d = Mat::from_fn(t.nrows(), t.ncols(), |i, j| s[(i, j)] - s[(j, i)]);
    Ok(norm_2(d.as_ref())? / norm_2(s.as_ref())?)
}

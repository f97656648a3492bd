//! Field reconstruction away from the boundary nodes.
//!
//! Outside the closed square the scattered field comes from Green's
//! representation `u^s = D[u^s] - S[u^s_n]`. Inside, the total field comes
//! from the downward sweep driven by `f = (T + iη) u` on the boundary Gauss
//! nodes, interpolated within the containing leaf.

use crate::bie::{green_representation, BoundaryMesh};
use crate::error::{Error, Result};
use crate::hps::{HierarchySolver, LeafValues};
use crate::numkit::barycentric_eval;
use crate::numkit::linalg::mat_vec;
use crate::scene::{Scene, Solution};
use faer::c64;
use rayon::prelude::*;

/// Whether `p` lies in the closed box `[x0, x1] x [y0, y1]`.
pub fn in_closed_box(domain: [f64; 4], p: [f64; 2]) -> bool {
    p[0] >= domain[0] && p[0] <= domain[1] && p[1] >= domain[2] && p[1] <= domain[3]
}

/// Distance from `p` to the box (zero inside).
pub fn distance_to_box(domain: [f64; 4], p: [f64; 2]) -> f64 {
    let dx = (domain[0] - p[0]).max(p[0] - domain[1]).max(0.0);
    let dy = (domain[2] - p[1]).max(p[1] - domain[3]).max(0.0);
    dx.hypot(dy)
}

/// Scattered field at points outside the closed domain.
pub fn eval_exterior(
    mesh: &BoundaryMesh,
    kappa: f64,
    us: &[c64],
    us_n: &[c64],
    points: &[[f64; 2]],
) -> Result<Vec<c64>> {
    if us.len() != mesh.len() || us_n.len() != mesh.len() {
        return Err(Error::Dimension(format!("boundary data has length {}/{}, mesh has {}", us.len(), us_n.len(), mesh.len())));
    }
    if let Some(p) = points.iter().find(|&&p| in_closed_box(mesh.domain, p)) {
        return Err(Error::Domain(format!("point {p:?} is not outside the domain")));
    }
    Ok(green_representation(mesh, kappa, us, us_n, points))
}

/// Incoming impedance data `(T + iη) u` from total-field values on the
/// boundary Gauss nodes.
pub fn interior_impedance(solver: &HierarchySolver, u_gauss: &[c64]) -> Result<Vec<c64>> {
    let dtn = solver
        .dtn
        .as_ref()
        .ok_or_else(|| Error::Config("the sweep was built without a DtN map".into()))?;
    if u_gauss.len() != dtn.t.nrows() {
        return Err(Error::Dimension(format!("boundary data has length {}, expected {}", u_gauss.len(), dtn.t.nrows())));
    }
    let ieta = c64::new(0.0, solver.eta);
    Ok(mat_vec(dtn.t.as_ref(), u_gauss).into_iter().zip(u_gauss).map(|(tu, u)| tu + ieta * u).collect())
}

/// Total field at points of the closed domain.
pub fn eval_interior(solver: &HierarchySolver, u_gauss: &[c64], points: &[[f64; 2]]) -> Result<Vec<c64>> {
    let f = interior_impedance(solver, u_gauss)?;
    let values = solver.apply_downward(&f)?;
    interpolate_leaves(solver, &values, points)
}

/// Tensor barycentric interpolation of sweep values within the leaf that
/// contains each point.
pub fn interpolate_leaves(solver: &HierarchySolver, values: &LeafValues, points: &[[f64; 2]]) -> Result<Vec<c64>> {
    let grid = solver.leaf_grid();
    let (nodes, weights) = (&grid.cheb.nodes, &grid.cheb.weights);
    let nc = grid.nc;
    points
        .iter()
        .map(|&p| {
            let id = solver
                .tree
                .locate_leaf(p)
                .ok_or_else(|| Error::Domain(format!("point {p:?} is outside the domain")))?;
            let v = values
                .leaf(id)
                .ok_or_else(|| Error::Config(format!("leaf {id} containing {p:?} was not retained")))?;
            let b = solver.tree.nodes[id].bounds;
            let h = 0.5 * (b[1] - b[0]);
            let xr = (p[0] - 0.5 * (b[0] + b[1])) / h;
            let yr = (p[1] - 0.5 * (b[2] + b[3])) / h;
            let rows: Vec<c64> = (0..nc).map(|j| barycentric_eval(nodes, weights, &v[nc * j..nc * (j + 1)], xr)).collect();
            Ok(barycentric_eval(nodes, weights, &rows, yr))
        })
        .collect()
}

/// Rectangular grid of `nx x ny` points including the bounds, row-major in `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub bounds: [f64; 4],
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<[f64; 2]> {
        let coord = |lo: f64, hi: f64, n: usize, k: usize| if n == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 };
        let [x0, x1, y0, y1] = self.bounds;
        (0..self.ny)
            .flat_map(|j| (0..self.nx).map(move |i| [coord(x0, x1, self.nx, i), coord(y0, y1, self.ny, j)]))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Interior = 0,
    /// Outside, but within one leaf size of the boundary.
    NearBoundary = 1,
    Exterior = 2,
}

#[derive(Clone, Debug)]
pub struct FieldGrid {
    pub spec: GridSpec,
    pub points: Vec<[f64; 2]>,
    pub scattered: Vec<c64>,
    pub total: Vec<c64>,
    pub region: Vec<Region>,
}

/// Scattered and total field on a grid, with region flags.
pub fn eval_total_grid(scene: &Scene, sol: &Solution, spec: GridSpec) -> Result<FieldGrid> {
    if spec.nx == 0 || spec.ny == 0 {
        return Err(Error::Config("grid needs at least one point per direction".into()));
    }
    let points = spec.points();
    let domain = scene.system.mesh.domain;
    let leaf = scene.solver.tree.leaf_size;
    let region: Vec<Region> = points
        .iter()
        .map(|&p| match distance_to_box(domain, p) {
            _ if in_closed_box(domain, p) => Region::Interior,
            d if d < leaf => Region::NearBoundary,
            _ => Region::Exterior,
        })
        .collect();
    let total = scene.total_field(sol, &points)?;
    let inc = sol.boundary.incident;
    let scattered = points.par_iter().zip(&total).map(|(&p, &u)| u - inc.value(p)).collect();
    Ok(FieldGrid { spec, points, scattered, total, region })
}

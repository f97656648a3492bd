//! The regularized boundary system `(I/2 - D + S T) u^s = S (u^i_n - T u^i)`.
//!
//! `T` is the interior DtN map transferred to the panel nodes: mesh values
//! are interpolated to the tree's boundary Gauss nodes, mapped by the DtN
//! matrix and interpolated back.

use super::layer::LayerOperators;
use super::mesh::BoundaryMesh;
use super::PlaneWave;
use crate::error::{Error, Result};
use crate::numkit::linalg::{eigenvalues, mat_vec, norm_inf, singular_values, to_complex, CMat, Lu};
use crate::quadtree::BoxTree;
use faer::c64;

pub struct ScatterSystem {
    pub mesh: BoundaryMesh,
    pub kappa: f64,
    pub layers: LayerOperators,
    /// DtN map on the mesh nodes.
    pub t_nodes: CMat,
    /// Mesh nodes to tree boundary Gauss nodes.
    pub to_gauss: CMat,
    pub a: CMat,
    lu: Lu,
}

/// Boundary data of one solve, all on the mesh nodes.
#[derive(Clone, Debug)]
pub struct BoundarySolution {
    pub incident: PlaneWave,
    pub ui: Vec<c64>,
    pub ui_n: Vec<c64>,
    pub us: Vec<c64>,
    pub us_n: Vec<c64>,
}

impl BoundarySolution {
    pub fn total(&self) -> Vec<c64> {
        self.ui.iter().zip(&self.us).map(|(a, b)| a + b).collect()
    }

    pub fn total_normal(&self) -> Vec<c64> {
        self.ui_n.iter().zip(&self.us_n).map(|(a, b)| a + b).collect()
    }
}

/// Eigenvalue and conditioning summary for the regularized operator and the
/// unregularized `T_int - T_ext` on the same mesh.
#[derive(Clone, Debug)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<c64>,
    pub max_abs_eigenvalue: f64,
    pub condition: f64,
    pub unregularized_eigenvalues: Vec<c64>,
    pub unregularized_max_abs: f64,
    pub unregularized_condition: f64,
}

/// Assembles and factors `A` from the layer operators and the DtN matrix on
/// the tree's boundary Gauss nodes.
pub fn assemble_and_factor(mesh: BoundaryMesh, layers: LayerOperators, tree: &BoxTree, t_int: &CMat) -> Result<ScatterSystem> {
    let n = mesh.len();
    let ngt = tree.boundary_node_count();
    if t_int.nrows() != ngt || t_int.ncols() != ngt {
        return Err(Error::Dimension(format!("DtN matrix is {}x{}, expected {ngt}", t_int.nrows(), t_int.ncols())));
    }
    if layers.s.nrows() != n {
        return Err(Error::Dimension("layer operators do not match the mesh".into()));
    }
    let pgn = to_complex(mesh.gauss_to_nodes(tree).as_ref());
    let qng = to_complex(mesh.nodes_to_gauss(tree).as_ref());
    let t_nodes = &pgn * (t_int * &qng);
    let mut a = &layers.s * &t_nodes - &layers.d;
    for i in 0..n {
        a[(i, i)] += c64::new(0.5, 0.0);
    }
    let lu = Lu::new(a.as_ref())?;
    Ok(ScatterSystem { kappa: layers.kappa, mesh, layers, t_nodes, to_gauss: qng, a, lu })
}

impl ScatterSystem {
    pub fn len(&self) -> usize {
        self.mesh.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mesh.is_empty()
    }

    /// Bytes held by the dense boundary matrices, the LU factors included.
    pub fn operator_bytes(&self) -> usize {
        let size = |m: &CMat| m.nrows() * m.ncols() * std::mem::size_of::<c64>();
        let n = self.len();
        size(&self.layers.s) + size(&self.layers.d) + size(&self.t_nodes) + size(&self.to_gauss) + size(&self.a) + n * n * std::mem::size_of::<c64>()
    }

    /// Solves for the scattered boundary data given incident data on the nodes.
    pub fn solve_data(&self, incident: PlaneWave, ui: Vec<c64>, ui_n: Vec<c64>) -> BoundarySolution {
        let tui = mat_vec(self.t_nodes.as_ref(), &ui);
        let g: Vec<c64> = ui_n.iter().zip(&tui).map(|(a, b)| a - b).collect();
        let rhs = mat_vec(self.layers.s.as_ref(), &g);
        let us = self.lu.solve_vec(&rhs);
        let tot: Vec<c64> = ui.iter().zip(&us).map(|(a, b)| a + b).collect();
        let t_tot = mat_vec(self.t_nodes.as_ref(), &tot);
        let us_n = t_tot.iter().zip(&ui_n).map(|(a, b)| a - b).collect();
        BoundarySolution { incident, ui, ui_n, us, us_n }
    }

    pub fn solve_boundary(&self, incident: PlaneWave) -> BoundarySolution {
        let ui = self.mesh.nodes.iter().map(|&x| incident.value(x)).collect();
        let ui_n = self.mesh.nodes.iter().zip(&self.mesh.normals).map(|(&x, &n)| incident.normal_derivative(x, n)).collect();
        self.solve_data(incident, ui, ui_n)
    }

    /// Mesh-node values interpolated to the tree's boundary Gauss nodes.
    pub fn to_gauss_nodes(&self, v: &[c64]) -> Vec<c64> {
        mat_vec(self.to_gauss.as_ref(), v)
    }

    /// `||A - I||_inf`.
    pub fn distance_from_identity(&self) -> f64 {
        let mut m = self.a.clone();
        for i in 0..self.len() {
            m[(i, i)] -= c64::new(1.0, 0.0);
        }
        norm_inf(m.as_ref())
    }

    /// 2-norm condition number of `A`.
    pub fn condition(&self) -> Result<f64> {
        let sv = singular_values(self.a.as_ref())?;
        Ok(sv[0] / sv[sv.len() - 1])
    }

    /// Spectra of `A` and of the unregularized `T_int - S^{-1}(D - I/2)`.
    pub fn spectrum(&self) -> Result<SpectrumReport> {
        let n = self.len();
        let eig = eigenvalues(self.a.as_ref())?;
        let max_abs_eigenvalue = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut dm = self.layers.d.clone();
        for i in 0..n {
            dm[(i, i)] -= c64::new(0.5, 0.0);
        }
        let t_ext = Lu::new(self.layers.s.as_ref())?.solve(dm.as_ref());
        let un = &self.t_nodes - &t_ext;
        let ueig = eigenvalues(un.as_ref())?;
        let usv = singular_values(un.as_ref())?;
        Ok(SpectrumReport {
            max_abs_eigenvalue,
            condition: self.condition()?,
            unregularized_max_abs: ueig.iter().map(|z| z.norm()).fold(0.0, f64::max),
            unregularized_condition: usv[0] / usv[usv.len() - 1],
            eigenvalues: eig,
            unregularized_eigenvalues: ueig,
        })
    }
}

//! Boundary integral formulation of the exterior problem on the boundary of
//! the square domain: panel mesh, layer operators, the regularized system
//! `A = I/2 - D + S T` and far-field diagnostics.

pub mod farfield;
pub mod layer;
pub mod mesh;
pub mod system;

pub use farfield::{far_field, optical_theorem};
pub use layer::{green_representation, layer_matrices, LayerOperators};
pub use mesh::{build_boundary_mesh, BoundaryMesh, Panel};
pub use system::{assemble_and_factor, BoundarySolution, ScatterSystem, SpectrumReport};

use faer::c64;

/// Incident plane wave `exp(iκ w·x)` with unit direction `w`.
#[derive(Clone, Copy, Debug)]
pub struct PlaneWave {
    pub kappa: f64,
    pub direction: [f64; 2],
}

impl PlaneWave {
    /// Normalizes `direction`.
    pub fn new(kappa: f64, direction: [f64; 2]) -> Self {
        let n = direction[0].hypot(direction[1]);
        PlaneWave { kappa, direction: [direction[0] / n, direction[1] / n] }
    }

    pub fn value(&self, x: [f64; 2]) -> c64 {
        c64::new(0.0, self.kappa * (self.direction[0] * x[0] + self.direction[1] * x[1])).exp()
    }

    /// Derivative along `n`.
    pub fn normal_derivative(&self, x: [f64; 2], n: [f64; 2]) -> c64 {
        let dn = self.direction[0] * n[0] + self.direction[1] * n[1];
        self.value(x) * c64::new(0.0, self.kappa * dn)
    }
}

//! Direct solver for two-dimensional Helmholtz scattering from a smooth,
//! compactly supported variable medium.
//!
//! The medium occupies the square `(-0.5, 0.5)^2`. Inside it, a quadtree of
//! spectral-collocation leaves produces impedance-to-impedance maps that are
//! merged up to the root. The root map yields the interior
//! Dirichlet-to-Neumann operator, which is coupled to a second-kind boundary
//! integral equation on the square's boundary. Once the hierarchy and the
//! boundary system are factored, each incident direction costs only a
//! boundary solve and one downward sweep.
//!
//! ```no_run
//! use hpscatter::{potentials, scene::{Scene, SceneConfig}};
//! let pot = potentials::builtin("bump1").unwrap();
//! let scene = Scene::build(&SceneConfig::new(40.0, 3), &pot).unwrap();
//! let sol = scene.solve_direction([1.0, 0.0]).unwrap();
//! let u = scene.total_field(&sol, &[[0.5, 0.0], [1.0, 0.5]]).unwrap();
//! println!("{:?}", u);
//! ```

pub mod bie;
pub mod error;
pub mod fields;
pub mod hps;
pub mod leaf;
pub mod numkit;
pub mod potentials;
pub mod quadtree;
pub mod radial;
pub mod scene;

pub use error::{Error, Result};
pub use faer::c64;

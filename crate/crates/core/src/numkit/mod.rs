//! Numerical building blocks: quadrature, Chebyshev differentiation,
//! interpolation, Bessel functions and dense linear algebra.

pub mod bessel;
pub mod cheb;
pub mod interp;
pub mod linalg;
pub mod quadrature;

pub use bessel::{bessel_h1, bessel_h1_deriv, bessel_j, bessel_j01, bessel_j_orders, hankel01, hankel1_orders};
pub use cheb::{cheb_diff_matrix, ChebyshevGrid1D};
pub use interp::{barycentric_eval, barycentric_weights, lagrange_interp_matrix, lagrange_row};
pub use linalg::CMat;
pub use quadrature::{gauss_legendre, QuadratureRule};

/// Error function, accurate to a few ulp.
#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Complementary error function.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

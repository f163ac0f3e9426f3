//! High-order transition finite elements for plane linear elasticity.
//!
//! Quadrilaterals of different shape-function family (spectral Lagrange or
//! hierarchic integrated-Legendre), size and order are coupled conformally by
//! building the shape functions of the coarse side through transfinite
//! (Boolean-sum) interpolation of piecewise edge traces.

pub mod analytic;
pub mod blending;
pub mod elasticity;
pub mod error;
pub mod mesh;
pub mod polybasis;
pub mod quadrature;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use polybasis::{BasisFamily, NodeDistribution};
pub use scalar::Real;

/// Double-precision one-dimensional basis.
pub type Basis1D = polybasis::Basis1D<f64>;
/// Double-precision edge trace space.
pub type EdgeSpec = blending::EdgeSpec<f64>;
/// Double-precision transition shape set.
pub type TransitionShapeSet = blending::TransitionShapeSet<f64>;
/// Double-precision Gauss rule.
pub type QuadRule = quadrature::QuadRule<f64>;

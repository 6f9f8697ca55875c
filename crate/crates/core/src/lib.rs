//! Curvature lab for pseudo-Riemannian metrics given in coordinates.
//!
//! Metric components are expression trees evaluated as order-3 Taylor jets,
//! from which the engine builds Christoffel symbols, the curvature tensor,
//! its covariant derivative and the Ricci operator. On top of that sit
//! algebraic curvature models, commutation checkers and the example families.

pub mod cli;
pub mod curvature;
pub mod expr;
pub mod families;
pub mod linalg;
pub mod models;
pub mod oracle;
pub mod sampling;
pub mod suite;
pub mod videv;

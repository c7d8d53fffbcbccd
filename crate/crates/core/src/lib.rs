//! Transformation-method design and finite-element simulation of diffusion-governed
//! communication fields.
//!
//! The field `u(x, t)` obeys `ρ ∂u/∂t = ∇·(α∇u) − βu + f` on a 2D domain. A
//! coordinate map pushes the material parameters `(ρ, α, β, f)` forward so that
//! the transformed medium carries the original field along the map. The crate
//! builds cloak and bender media this way, solves the equation with bilinear
//! finite elements, and measures how well the designs perform.

pub mod error;
pub mod experiments;
pub mod material;
pub mod mesh;
pub mod region;
pub mod solver;
pub mod transform;

pub use error::{Error, Result};

pub type Point = nalgebra::Point2<f64>;

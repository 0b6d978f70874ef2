//! Mixed Taylor-Hood discretization of the (penalized) Stokes-Brinkmann
//! problem
//!
//! ```text
//! −ν Δψ + (α + δc) ψ + ∇p = f   in Ω
//!                    div ψ = 0   in Ω
//!                        ψ = 0   on Γ
//!          ν ∂ψ/∂n − p n = g   on Σ
//! ```
//! (or the symmetric-strain variant with `σ(ψ,p) n = g`).

pub mod assembly;
pub mod basis;
pub mod element;
pub mod fields;
pub mod norms;
pub mod params;
pub mod quadrature;
pub mod solve;
pub mod sparse;

pub use assembly::{assemble, body_force_load, BodyForce, SaddleSystem};
pub use element::{element_matrices, ElementMatrices, StiffnessForm};
pub use fields::{PressureField, VelocityField};
pub use params::{BrinkmannParams, CoefficientField, Traction};
pub use solve::{solve_saddle, SaddleSolver};
pub use sparse::CsrMatrix;

use crate::error::Result;
use crate::geometry::Point;
use crate::mesh::Mesh;

/// Evaluates a velocity field at `x` (P2 interpolation).
pub fn evaluate_velocity(field: &VelocityField, mesh: &Mesh, x: Point) -> Result<Point> {
    field.evaluate(mesh, x)
}

/// Evaluates a pressure field at `x` (P1 interpolation).
pub fn evaluate_pressure(field: &PressureField, mesh: &Mesh, x: Point) -> Result<f64> {
    field.evaluate(mesh, x)
}

//! One-shot reconstruction of an obstacle immersed in a two-dimensional
//! Stokes-Brinkmann flow from an interior velocity measurement.
//!
//! The pipeline is non-iterative: one forward solve on the obstacle-free
//! domain, one adjoint solve driven by the data misfit, then a level-set
//! threshold of the topological gradient `G = ψ₀·ϑ₀`.
//!
//! Modules, bottom-up:
//! - [`mesh`]: structured P2/P1 triangulation of the unit square.
//! - [`fem`]: Taylor-Hood assembly and the saddle-point solve.
//! - [`brinkmann`]: data, direct and adjoint problems, penalized obstacles.
//! - [`topo`]: topological gradient, level sets, cost, threshold selection.
//! - [`experiments`]: scenario runner, sweeps and verification checks.
//! - [`io`]: configuration, VTK and CSV export.

pub mod brinkmann;
pub mod error;
pub mod experiments;
pub mod fem;
pub mod geometry;
pub mod io;
pub mod mesh;
pub mod topo;

pub use error::{Error, Result};
pub use geometry::Point;

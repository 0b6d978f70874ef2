//! Topological sensitivity of the misfit cost and the one-shot
//! reconstruction built from it.
//!
//! `G = ψ₀·ϑ₀` is sampled at mesh vertices. Candidate obstacles are its
//! sub-level sets `ω_γ = {G ≤ (1−γ) min G}`; the threshold is chosen by
//! minimizing the misfit of the penalized forward solution over a uniform
//! grid of γ values.

mod asymptotic;
mod cost;
mod level_set;
mod score;

pub use asymptotic::{asymptotic_check, lemma_rate, loglog_slope, AsymptoticCheck, AsymptoticSample, LemmaRate};
pub use cost::{cost_j, gamma_grid, misfit_on, select_gamma_star, GammaRow, ReconstructionResult, RegionSummary};
pub use level_set::{level_set_region, marching_squares_perimeter, LevelSetRegion};
pub use score::{error_e, truth_fractions, TRUTH_SUBDIVISIONS};

use crate::error::{Error, Result};
use crate::fem::VelocityField;
use crate::geometry::Point;
use crate::mesh::Mesh;

/// Vertex samples of the topological gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct TopoGradientField {
    values: Vec<f64>,
    min_vertex: usize,
    min_value: f64,
    min_location: Point,
}

impl TopoGradientField {
    /// Wraps vertex values; the minimum is located with lowest-index
    /// tie-breaking.
    pub fn from_values(mesh: &Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_vertices() {
            return Err(Error::DimensionMismatch(format!(
                "gradient has {} values, mesh has {} vertices",
                values.len(),
                mesh.num_vertices()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("G", "values must be finite"));
        }
        let mut min_vertex = 0;
        for (i, v) in values.iter().enumerate() {
            if *v < values[min_vertex] {
                min_vertex = i;
            }
        }
        Ok(Self {
            min_value: values[min_vertex],
            min_location: mesh.vertices()[min_vertex],
            min_vertex,
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min_value(&self) -> f64 {
        self.min_value
    }

    pub fn min_vertex(&self) -> usize {
        self.min_vertex
    }

    pub fn min_location(&self) -> Point {
        self.min_location
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Whether any vertex carries a negative sensitivity.
    pub fn has_descent(&self) -> bool {
        self.min_value < 0.0
    }
}

/// `G(x) = ψ₀(x)·ϑ₀(x)` at every vertex.
pub fn topological_gradient(mesh: &Mesh, psi0: &VelocityField, theta0: &VelocityField) -> Result<TopoGradientField> {
    if !psi0.matches(mesh) || !theta0.matches(mesh) {
        return Err(Error::DimensionMismatch("direct and adjoint fields must live on the mesh".into()));
    }
    // Vertices are the first nodes of the P2 numbering.
    let values = (0..mesh.num_vertices())
        .map(|v| psi0.at_node(v).dot(theta0.at_node(v)))
        .collect();
    TopoGradientField::from_values(mesh, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundaryPartition;

    #[test]
    fn gradient_is_pointwise_product() {
        let mesh = Mesh::unit_square(4, BoundaryPartition::default()).unwrap();
        let a = VelocityField::interpolate(&mesh, |p| Point::new(p.x, 1.0));
        let b = VelocityField::interpolate(&mesh, |p| Point::new(-1.0, p.y));
        let g = topological_gradient(&mesh, &a, &b).unwrap();
        for (v, p) in mesh.vertices().iter().enumerate() {
            assert_eq!(g.values()[v], -p.x + p.y);
        }
        // Minimum −1 at (1, 0) only.
        assert_eq!(g.min_value(), -1.0);
        assert_eq!(g.min_location(), Point::new(1.0, 0.0));
    }

    #[test]
    fn ties_resolve_to_lowest_index() {
        let mesh = Mesh::unit_square(2, BoundaryPartition::default()).unwrap();
        let mut values = vec![0.0; 9];
        values[4] = -1.0;
        values[7] = -1.0;
        let g = TopoGradientField::from_values(&mesh, values).unwrap();
        assert_eq!(g.min_vertex(), 4);
        let zero = TopoGradientField::from_values(&mesh, vec![0.0; 9]).unwrap();
        assert_eq!(zero.min_vertex(), 0);
        assert!(!zero.has_descent());
    }

    #[test]
    fn rejects_foreign_fields() {
        let a = Mesh::unit_square(2, BoundaryPartition::default()).unwrap();
        let b = Mesh::unit_square(3, BoundaryPartition::default()).unwrap();
        let u = VelocityField::zeros(&a);
        let w = VelocityField::zeros(&b);
        assert!(topological_gradient(&a, &u, &w).is_err());
        assert!(TopoGradientField::from_values(&a, vec![0.0; 3]).is_err());
        assert!(TopoGradientField::from_values(&a, vec![f64::NAN; 9]).is_err());
    }
}

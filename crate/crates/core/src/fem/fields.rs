//! Nodal finite element fields and their point evaluation.

use super::basis::p2_values;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::Mesh;

/// P2 velocity coefficients, two components per node, interleaved
/// (`[u_x(0), u_y(0), u_x(1), ...]`).
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityField {
    values: Vec<f64>,
}

impl VelocityField {
    pub fn zeros(mesh: &Mesh) -> Self {
        Self {
            values: vec![0.0; 2 * mesh.num_nodes()],
        }
    }

    pub fn from_values(mesh: &Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != 2 * mesh.num_nodes() {
            return Err(Error::DimensionMismatch(format!(
                "velocity field has {} coefficients, mesh needs {}",
                values.len(),
                2 * mesh.num_nodes()
            )));
        }
        Ok(Self { values })
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: &Mesh, f: impl Fn(Point) -> Point) -> Self {
        let mut values = Vec::with_capacity(2 * mesh.num_nodes());
        for p in mesh.nodes() {
            let v = f(*p);
            values.push(v.x);
            values.push(v.y);
        }
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn num_nodes(&self) -> usize {
        self.values.len() / 2
    }

    pub fn at_node(&self, k: usize) -> Point {
        Point::new(self.values[2 * k], self.values[2 * k + 1])
    }

    pub fn matches(&self, mesh: &Mesh) -> bool {
        self.values.len() == 2 * mesh.num_nodes()
    }

    /// Largest nodal component magnitude.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `self − other`.
    pub fn difference(&self, other: &VelocityField) -> Result<Self> {
        if self.values.len() != other.values.len() {
            return Err(Error::DimensionMismatch("velocity fields live on different meshes".into()));
        }
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    /// P2 interpolation at an arbitrary point of the square.
    pub fn evaluate(&self, mesh: &Mesh, x: Point) -> Result<Point> {
        if !self.matches(mesh) {
            return Err(Error::DimensionMismatch("velocity field does not belong to this mesh".into()));
        }
        let loc = mesh.locate_point(x)?;
        let tri = &mesh.triangles()[loc.triangle];
        let phi = p2_values(loc.barycentric);
        let mut out = Point::default();
        for (k, &node) in tri.iter().enumerate() {
            out = out + phi[k] * self.at_node(node);
        }
        Ok(out)
    }
}

/// P1 pressure coefficients, one per mesh vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct PressureField {
    values: Vec<f64>,
}

impl PressureField {
    pub fn zeros(mesh: &Mesh) -> Self {
        Self {
            values: vec![0.0; mesh.num_vertices()],
        }
    }

    pub fn from_values(mesh: &Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_vertices() {
            return Err(Error::DimensionMismatch(format!(
                "pressure field has {} coefficients, mesh needs {}",
                values.len(),
                mesh.num_vertices()
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn evaluate(&self, mesh: &Mesh, x: Point) -> Result<f64> {
        if self.values.len() != mesh.num_vertices() {
            return Err(Error::DimensionMismatch("pressure field does not belong to this mesh".into()));
        }
        let loc = mesh.locate_point(x)?;
        let tri = &mesh.triangles()[loc.triangle];
        Ok((0..3).map(|k| loc.barycentric[k] * self.values[tri[k]]).sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundaryPartition;

    fn mesh() -> Mesh {
        Mesh::unit_square(5, BoundaryPartition::default()).unwrap()
    }

    #[test]
    fn constant_field_is_reproduced() {
        let mesh = mesh();
        let u = VelocityField::interpolate(&mesh, |_| Point::new(1.5, -2.0));
        let p = PressureField::from_values(&mesh, vec![0.75; mesh.num_vertices()]).unwrap();
        for x in [Point::new(0.31, 0.77), Point::new(1.0, 0.0), Point::new(0.5, 0.5)] {
            let v = u.evaluate(&mesh, x).unwrap();
            assert!((v.x - 1.5).abs() < 1e-14 && (v.y + 2.0).abs() < 1e-14);
            assert!((p.evaluate(&mesh, x).unwrap() - 0.75).abs() < 1e-14);
        }
    }

    #[test]
    fn linear_field_is_exact() {
        let mesh = mesh();
        let f = |p: Point| p.x + p.y;
        let u = VelocityField::interpolate(&mesh, |p| Point::new(f(p), 2.0 * f(p)));
        let pv: Vec<f64> = mesh.vertices().iter().map(|p| f(*p)).collect();
        let pf = PressureField::from_values(&mesh, pv).unwrap();
        for x in [Point::new(0.123, 0.456), Point::new(0.9, 0.05), Point::new(0.61, 0.61)] {
            let v = u.evaluate(&mesh, x).unwrap();
            assert!((v.x - f(x)).abs() < 1e-14);
            assert!((v.y - 2.0 * f(x)).abs() < 1e-14);
            assert!((pf.evaluate(&mesh, x).unwrap() - f(x)).abs() < 1e-14);
        }
    }

    #[test]
    fn lagrange_property_at_nodes() {
        let mesh = mesh();
        let values: Vec<f64> = (0..2 * mesh.num_nodes()).map(|k| ((k * 7919) % 113) as f64 / 13.0).collect();
        let u = VelocityField::from_values(&mesh, values).unwrap();
        for (k, p) in mesh.nodes().iter().enumerate().step_by(7) {
            let v = u.evaluate(&mesh, *p).unwrap();
            assert!(v.distance(u.at_node(k)) < 1e-13);
        }
    }

    #[test]
    fn outside_points_and_wrong_sizes_rejected() {
        let mesh = mesh();
        let u = VelocityField::zeros(&mesh);
        assert!(u.evaluate(&mesh, Point::new(1.5, 0.5)).is_err());
        assert!(VelocityField::from_values(&mesh, vec![0.0; 3]).is_err());
        let other = Mesh::unit_square(3, BoundaryPartition::default()).unwrap();
        assert!(u.evaluate(&other, Point::new(0.5, 0.5)).is_err());
    }
}

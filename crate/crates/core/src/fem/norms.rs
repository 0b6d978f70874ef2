//! Integral norms of finite element fields.

use super::basis::{p1_values, p2_values, TriangleGeometry};
use super::element::{p2_mass_with, p2_stiffness_with};
use super::fields::{PressureField, VelocityField};
use super::quadrature::TriangleRule;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::Mesh;

fn check(mesh: &Mesh, field: &VelocityField) -> Result<()> {
    if field.matches(mesh) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch("velocity field does not belong to this mesh".into()))
    }
}

/// `∫ |u|²` over the triangles selected by `include` (exact for P2 fields).
pub fn l2_norm_sq_on(mesh: &Mesh, u: &VelocityField, include: impl Fn(usize) -> bool) -> Result<f64> {
    check(mesh, u)?;
    let mut total = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        if !include(t) {
            continue;
        }
        let m = p2_mass_with(&TriangleGeometry::new(mesh.triangle_vertices(t))?);
        for i in 0..6 {
            let ui = u.at_node(tri[i]);
            for j in 0..6 {
                total += m[i][j] * ui.dot(u.at_node(tri[j]));
            }
        }
    }
    Ok(total)
}

/// `∫ u·v` over the whole domain (exact for P2 fields).
pub fn l2_inner(mesh: &Mesh, u: &VelocityField, v: &VelocityField) -> Result<f64> {
    check(mesh, u)?;
    check(mesh, v)?;
    let mut total = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let m = p2_mass_with(&TriangleGeometry::new(mesh.triangle_vertices(t))?);
        for i in 0..6 {
            let ui = u.at_node(tri[i]);
            for j in 0..6 {
                total += m[i][j] * ui.dot(v.at_node(tri[j]));
            }
        }
    }
    Ok(total)
}

pub fn l2_norm(mesh: &Mesh, u: &VelocityField) -> Result<f64> {
    Ok(l2_norm_sq_on(mesh, u, |_| true)?.sqrt())
}

/// Full `H¹` norm `(‖u‖² + ‖∇u‖²)^{1/2}`.
pub fn h1_norm(mesh: &Mesh, u: &VelocityField) -> Result<f64> {
    check(mesh, u)?;
    let mut total = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let geo = TriangleGeometry::new(mesh.triangle_vertices(t))?;
        let m = p2_mass_with(&geo);
        let k = p2_stiffness_with(&geo);
        for i in 0..6 {
            let ui = u.at_node(tri[i]);
            for j in 0..6 {
                total += (m[i][j] + k[i][j]) * ui.dot(u.at_node(tri[j]));
            }
        }
    }
    Ok(total.sqrt())
}

/// `‖u_h − u‖_{L²}` against an analytic field.
pub fn l2_error_velocity(mesh: &Mesh, u: &VelocityField, exact: impl Fn(Point) -> Point) -> Result<f64> {
    check(mesh, u)?;
    let rule = TriangleRule::collapsed_gauss(6);
    let mut total = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let geo = TriangleGeometry::new(mesh.triangle_vertices(t))?;
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let phi = p2_values(*l);
            let mut uh = Point::default();
            for (k, &node) in tri.iter().enumerate() {
                uh = uh + phi[k] * u.at_node(node);
            }
            let e = uh - exact(geo.point(*l));
            total += w * geo.area * e.dot(e);
        }
    }
    Ok(total.sqrt())
}

/// `‖p_h − p‖_{L²}` against an analytic field.
pub fn l2_error_pressure(mesh: &Mesh, p: &PressureField, exact: impl Fn(Point) -> f64) -> Result<f64> {
    if p.values().len() != mesh.num_vertices() {
        return Err(Error::DimensionMismatch("pressure field does not belong to this mesh".into()));
    }
    let rule = TriangleRule::collapsed_gauss(6);
    let mut total = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let geo = TriangleGeometry::new(mesh.triangle_vertices(t))?;
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let psi = p1_values(*l);
            let ph: f64 = (0..3).map(|k| psi[k] * p.values()[tri[k]]).sum();
            let e = ph - exact(geo.point(*l));
            total += w * geo.area * e * e;
        }
    }
    Ok(total.sqrt())
}

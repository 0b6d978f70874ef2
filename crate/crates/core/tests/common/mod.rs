//! Manufactured Brinkmann solution shared by the solver tests.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use topograd::fem::norms::{l2_error_pressure, l2_error_velocity};
use topograd::fem::{assemble, BodyForce, BrinkmannParams, CoefficientField, SaddleSolver, Traction};
use topograd::mesh::{BoundaryPartition, Mesh, Side};
use topograd::Point;

pub fn mesh(n: usize) -> Mesh {
    Mesh::unit_square(n, BoundaryPartition::default()).unwrap()
}

// Manufactured solution from the stream function a(x) a(y) with
// a(t) = t²(1−t)², and pressure sin(πx) cos(πy).
fn a0(t: f64) -> f64 {
    t * t * (1.0 - t) * (1.0 - t)
}
fn a1(t: f64) -> f64 {
    2.0 * t * (1.0 - t) * (1.0 - 2.0 * t)
}
fn a2(t: f64) -> f64 {
    2.0 - 12.0 * t + 12.0 * t * t
}
fn a3(t: f64) -> f64 {
    -12.0 + 24.0 * t
}

fn exact_u(p: Point) -> Point {
    Point::new(a0(p.x) * a1(p.y), -a1(p.x) * a0(p.y))
}

fn exact_p(p: Point) -> f64 {
    (PI * p.x).sin() * (PI * p.y).cos()
}

fn grad_p(p: Point) -> Point {
    Point::new(PI * (PI * p.x).cos() * (PI * p.y).cos(), -PI * (PI * p.x).sin() * (PI * p.y).sin())
}

fn laplacian_u(p: Point) -> Point {
    Point::new(
        a2(p.x) * a1(p.y) + a0(p.x) * a3(p.y),
        -a3(p.x) * a0(p.y) - a1(p.x) * a2(p.y),
    )
}

// ∂u/∂x, which is all the traction needs on the vertical sides.
fn du_dx(p: Point) -> Point {
    Point::new(a1(p.x) * a1(p.y), -a2(p.x) * a0(p.y))
}

fn mms_params(nu: f64, alpha: f64) -> BrinkmannParams {
    let traction = move |side: Side, p: Point| {
        let n = side.normal();
        let du = du_dx(p);
        // ν ∂u/∂n − p n with n = ±e_x.
        Point::new(n.x * nu * du.x - exact_p(p) * n.x, n.x * nu * du.y - exact_p(p) * n.y)
    };
    BrinkmannParams {
        nu,
        alpha,
        traction: Traction::Custom(Arc::new(traction)),
        ..BrinkmannParams::default()
    }
}

/// L² velocity and pressure errors on the `n × n` mesh.
pub fn mms_errors(n: usize, nu: f64, alpha: f64) -> (f64, f64) {
    let m = mesh(n);
    let params = mms_params(nu, alpha);
    let mut system = assemble(&m, &params, &CoefficientField::zeros(&m)).unwrap();
    let f = move |p: Point| {
        let lap = laplacian_u(p);
        let u = exact_u(p);
        let g = grad_p(p);
        Point::new(-nu * lap.x + alpha * u.x + g.x, -nu * lap.y + alpha * u.y + g.y)
    };
    system.add_body_force(&m, BodyForce::Function(&f)).unwrap();
    let solver = SaddleSolver::factorize(&system).unwrap();
    let (u, p) = solver.solve(&m, &system.rhs_u, &system.rhs_p).unwrap();
    (
        l2_error_velocity(&m, &u, exact_u).unwrap(),
        l2_error_pressure(&m, &p, exact_p).unwrap(),
    )
}

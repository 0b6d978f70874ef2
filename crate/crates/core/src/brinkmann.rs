//! The three boundary value problems of the reconstruction: synthetic data
//! with the true obstacle, the obstacle-free direct problem and the adjoint
//! problem driven by the data misfit.
//!
//! Obstacles are never meshed. They enter through a piecewise-constant
//! penalization `δc = k` on the triangles whose centroid lies inside the
//! shape, which drives the velocity there towards zero.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{
    assemble, body_force_load, BodyForce, BrinkmannParams, CoefficientField, PressureField, SaddleSolver,
    SaddleSystem, VelocityField,
};
use crate::geometry::Point;
use crate::mesh::Mesh;

/// Ground-truth obstacle geometry.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ObstacleShape {
    /// No obstacle at all.
    #[default]
    None,
    Disc { center: Point, radius: f64 },
    Ellipse {
        center: Point,
        semi_axes: [f64; 2],
        /// Counter-clockwise rotation of the first semi-axis, in radians.
        #[serde(default)]
        rotation: f64,
    },
}

impl ObstacleShape {
    pub fn disc(center: Point, radius: f64) -> Self {
        ObstacleShape::Disc { center, radius }
    }

    pub fn ellipse(center: Point, semi_axes: [f64; 2], rotation: f64) -> Self {
        ObstacleShape::Ellipse {
            center,
            semi_axes,
            rotation,
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, ObstacleShape::None)
    }

    pub fn center(&self) -> Option<Point> {
        match self {
            ObstacleShape::None => None,
            ObstacleShape::Disc { center, .. } | ObstacleShape::Ellipse { center, .. } => Some(*center),
        }
    }

    /// Half-widths of the axis-aligned bounding box.
    pub(crate) fn half_extent(&self) -> (f64, f64) {
        match *self {
            ObstacleShape::None => (0.0, 0.0),
            ObstacleShape::Disc { radius, .. } => (radius, radius),
            ObstacleShape::Ellipse {
                semi_axes: [a, b],
                rotation,
                ..
            } => {
                let (s, c) = rotation.sin_cos();
                ((a * a * c * c + b * b * s * s).sqrt(), (a * a * s * s + b * b * c * c).sqrt())
            }
        }
    }

    /// Checks positivity and that the closed shape stays strictly inside the
    /// unit square.
    pub fn validate(&self) -> Result<()> {
        let center = match *self {
            ObstacleShape::None => return Ok(()),
            ObstacleShape::Disc { center, radius } => {
                if !(radius.is_finite() && radius > 0.0) {
                    return Err(Error::InvalidShape(format!("radius must be positive, got {radius}")));
                }
                center
            }
            ObstacleShape::Ellipse {
                center,
                semi_axes: [a, b],
                rotation,
            } => {
                if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
                    return Err(Error::InvalidShape(format!("semi-axes must be positive, got ({a}, {b})")));
                }
                if !rotation.is_finite() {
                    return Err(Error::InvalidShape("rotation must be finite".into()));
                }
                center
            }
        };
        let (ex, ey) = self.half_extent();
        if !center.is_finite()
            || center.x - ex <= 0.0
            || center.x + ex >= 1.0
            || center.y - ey <= 0.0
            || center.y + ey >= 1.0
        {
            return Err(Error::InvalidShape(format!(
                "shape must lie strictly inside the unit square: {self:?}"
            )));
        }
        Ok(())
    }

    /// Indicator of the closed shape.
    pub fn contains(&self, p: Point) -> bool {
        match *self {
            ObstacleShape::None => false,
            ObstacleShape::Disc { center, radius } => {
                let d = p - center;
                d.dot(d) <= radius * radius
            }
            ObstacleShape::Ellipse {
                center,
                semi_axes: [a, b],
                rotation,
            } => {
                let d = p - center;
                let (s, c) = rotation.sin_cos();
                let u = c * d.x + s * d.y;
                let v = -s * d.x + c * d.y;
                (u / a).powi(2) + (v / b).powi(2) <= 1.0
            }
        }
    }

    /// Exact Lebesgue measure.
    pub fn area(&self) -> f64 {
        match *self {
            ObstacleShape::None => 0.0,
            ObstacleShape::Disc { radius, .. } => PI * radius * radius,
            ObstacleShape::Ellipse { semi_axes: [a, b], .. } => PI * a * b,
        }
    }

    /// The same shape moved to `center` and scaled by `factor`
    /// (`z + ε ω` for a reference shape `ω`).
    pub fn placed(&self, center: Point, factor: f64) -> Self {
        match *self {
            ObstacleShape::None => ObstacleShape::None,
            ObstacleShape::Disc { radius, .. } => ObstacleShape::Disc {
                center,
                radius: radius * factor,
            },
            ObstacleShape::Ellipse {
                semi_axes: [a, b],
                rotation,
                ..
            } => ObstacleShape::Ellipse {
                center,
                semi_axes: [a * factor, b * factor],
                rotation,
            },
        }
    }
}

/// Triangles whose centroid lies in `shape`.
pub fn obstacle_triangles(mesh: &Mesh, shape: &ObstacleShape) -> Vec<usize> {
    (0..mesh.num_triangles())
        .filter(|&t| shape.contains(mesh.centroid(t)))
        .collect()
}

/// Penalization coefficient of an obstacle: `k` on triangles whose centroid
/// lies in the shape, zero elsewhere.
pub fn indicator_to_coefficient(mesh: &Mesh, shape: &ObstacleShape, k_penalty: f64) -> Result<CoefficientField> {
    shape.validate()?;
    CoefficientField::indicator(mesh, &obstacle_triangles(mesh, shape), k_penalty)
}

/// Internal velocity measurement `ψ^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub psi_d: VelocityField,
    pub noise_level: f64,
}

/// Adds i.i.d. Gaussian noise of standard deviation `delta · max|ψ|` to every
/// nodal velocity component.
pub fn add_noise(clean: &VelocityField, delta: f64, seed: u64) -> Result<VelocityField> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::param("noise", format!("noise level must be nonnegative, got {delta}")));
    }
    if delta == 0.0 {
        return Ok(clean.clone());
    }
    let std = delta * clean.max_abs();
    let mut noisy = clean.clone();
    if std == 0.0 {
        return Ok(noisy);
    }
    let normal = Normal::new(0.0, std).map_err(|e| Error::param("noise", e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in noisy.values_mut() {
        *v += normal.sample(&mut rng);
    }
    Ok(noisy)
}

/// Nodal interpolation of a P2 field from one mesh onto another.
pub fn transfer_field(field: &VelocityField, from: &Mesh, to: &Mesh) -> Result<VelocityField> {
    let mut values = Vec::with_capacity(2 * to.num_nodes());
    for p in to.nodes() {
        let v = field.evaluate(from, *p)?;
        values.push(v.x);
        values.push(v.y);
    }
    VelocityField::from_values(to, values)
}

/// Forward/adjoint solver on one mesh with one parameter set.
///
/// The obstacle-free operator is factorized once and shared by the direct and
/// adjoint solves (the operator is symmetric). Its symbolic analysis is reused
/// for every penalized operator on the same mesh.
pub struct BrinkmannProblem<'m> {
    mesh: &'m Mesh,
    params: BrinkmannParams,
    base: SaddleSystem,
    solver: SaddleSolver,
    direct: OnceLock<(VelocityField, PressureField)>,
}

impl<'m> BrinkmannProblem<'m> {
    pub fn new(mesh: &'m Mesh, params: &BrinkmannParams) -> Result<Self> {
        let base = assemble(mesh, params, &CoefficientField::zeros(mesh))?;
        let solver = SaddleSolver::factorize(&base)?;
        Ok(Self {
            mesh,
            params: params.clone(),
            base,
            solver,
            direct: OnceLock::new(),
        })
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn params(&self) -> &BrinkmannParams {
        &self.params
    }

    /// The obstacle-free system `A₀`.
    pub fn base_system(&self) -> &SaddleSystem {
        &self.base
    }

    pub fn base_solver(&self) -> &SaddleSolver {
        &self.solver
    }

    /// Obstacle-free direct solution `(ψ₀, p₀)`; computed once.
    pub fn solve_direct(&self) -> Result<(VelocityField, PressureField)> {
        if let Some(sol) = self.direct.get() {
            return Ok(sol.clone());
        }
        let sol = self.solver.solve(self.mesh, &self.base.rhs_u, &self.base.rhs_p)?;
        Ok(self.direct.get_or_init(|| sol).clone())
    }

    /// Solution of the penalized problem with an arbitrary coefficient field.
    pub fn solve_with_coefficient(&self, dc: &CoefficientField) -> Result<(VelocityField, PressureField)> {
        if dc.is_zero() {
            return self.solve_direct();
        }
        let system = assemble(self.mesh, &self.params, dc)?;
        let solver = SaddleSolver::factorize_with(&system, Some(self.solver.symbolic()))?;
        solver.solve(self.mesh, &system.rhs_u, &system.rhs_p)
    }

    /// Penalized solution `(ψ_ε, p_ε)` in the presence of `shape`.
    pub fn solve_with_obstacle(&self, shape: &ObstacleShape) -> Result<(VelocityField, PressureField)> {
        let dc = indicator_to_coefficient(self.mesh, shape, self.params.k_penalty)?;
        self.solve_with_coefficient(&dc)
    }

    /// Synthetic measurement: the penalized solution for `shape`, corrupted
    /// by seeded Gaussian noise of relative level `delta`.
    pub fn make_measurement(&self, shape: &ObstacleShape, delta: f64, seed: u64) -> Result<Measurement> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::param("noise", format!("noise level must be nonnegative, got {delta}")));
        }
        let (clean, _) = self.solve_with_obstacle(shape)?;
        Ok(Measurement {
            psi_d: add_noise(&clean, delta, seed)?,
            noise_level: delta,
        })
    }

    /// Adjoint state `ϑ₀`: the obstacle-free operator with body force
    /// `−2(ψ₀ − ψ^d)`, no-slip on Γ and zero traction on Σ.
    pub fn solve_adjoint(&self, psi0: &VelocityField, measurement: &Measurement) -> Result<VelocityField> {
        let residual = psi0.difference(&measurement.psi_d)?;
        let force = residual.scaled(-2.0);
        let load = body_force_load(self.mesh, BodyForce::Nodal(&force))?;
        let (theta, _) = self.solver.solve(self.mesh, &load, &vec![0.0; self.mesh.num_vertices()])?;
        Ok(theta)
    }
}

/// Obstacle-free direct solve.
pub fn solve_direct(mesh: &Mesh, params: &BrinkmannParams) -> Result<(VelocityField, PressureField)> {
    BrinkmannProblem::new(mesh, params)?.solve_direct()
}

/// Penalized solve with an obstacle.
pub fn solve_with_obstacle(
    mesh: &Mesh,
    params: &BrinkmannParams,
    shape: &ObstacleShape,
) -> Result<(VelocityField, PressureField)> {
    shape.validate()?;
    let dc = indicator_to_coefficient(mesh, shape, params.k_penalty)?;
    let system = assemble(mesh, params, &dc)?;
    SaddleSolver::factorize(&system)?.solve(mesh, &system.rhs_u, &system.rhs_p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundaryPartition;

    #[test]
    fn shape_validation() {
        assert!(ObstacleShape::disc(Point::new(0.5, 0.5), 0.05).validate().is_ok());
        assert!(ObstacleShape::disc(Point::new(0.5, 0.5), 0.0).validate().is_err());
        assert!(ObstacleShape::disc(Point::new(0.5, 0.5), 0.8).validate().is_err());
        assert!(ObstacleShape::disc(Point::new(0.04, 0.5), 0.05).validate().is_err());
        assert!(ObstacleShape::ellipse(Point::new(0.5, 0.5), [0.1, 0.05], 0.3).validate().is_ok());
        assert!(ObstacleShape::ellipse(Point::new(0.5, 0.5), [0.6, 0.05], 0.0).validate().is_err());
        // Rotated by 90°, the long axis is vertical.
        let e = ObstacleShape::ellipse(Point::new(0.5, 0.92), [0.1, 0.05], std::f64::consts::FRAC_PI_2);
        assert!(e.validate().is_err());
        assert!(e.contains(Point::new(0.5, 0.97)));
        assert!(!e.contains(Point::new(0.58, 0.92)));
        assert!(ObstacleShape::None.validate().is_ok());
    }

    #[test]
    fn no_shape_gives_zero_coefficient() {
        let mesh = Mesh::unit_square(8, BoundaryPartition::default()).unwrap();
        let dc = indicator_to_coefficient(&mesh, &ObstacleShape::None, 1e6).unwrap();
        assert!(dc.is_zero());
    }

    #[test]
    fn disc_triangle_count_matches_enumeration() {
        let mesh = Mesh::unit_square(100, BoundaryPartition::default()).unwrap();
        let shape = ObstacleShape::disc(Point::new(0.5, 0.5), 0.05);
        let dc = indicator_to_coefficient(&mesh, &shape, 1e6).unwrap();
        let flagged = dc.support().len();
        // Independent enumeration over cells: each cell contributes its two
        // triangles with centroids at (i + 2/3, j + 1/3) h and (i + 1/3, j + 2/3) h.
        let mut count = 0;
        for j in 0..100 {
            for i in 0..100 {
                for (a, b) in [(2.0 / 3.0, 1.0 / 3.0), (1.0 / 3.0, 2.0 / 3.0)] {
                    let x = (i as f64 + a) / 100.0 - 0.5;
                    let y = (j as f64 + b) / 100.0 - 0.5;
                    if x * x + y * y <= 0.0025 {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(flagged, count);
        assert!((flagged as i64 - 157).abs() <= 20, "flagged {flagged}");
        assert!(dc.values().iter().all(|v| *v == 0.0 || *v == 1e6));
    }

    #[test]
    fn noise_is_seeded_and_scaled() {
        let mesh = Mesh::unit_square(4, BoundaryPartition::default()).unwrap();
        let clean = VelocityField::interpolate(&mesh, |p| Point::new(p.x, -2.0 * p.y));
        assert_eq!(add_noise(&clean, 0.0, 7).unwrap(), clean);
        let a = add_noise(&clean, 0.1, 7).unwrap();
        let b = add_noise(&clean, 0.1, 7).unwrap();
        let c = add_noise(&clean, 0.1, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(add_noise(&clean, -0.1, 7).is_err());
    }

    #[test]
    fn placed_template() {
        let t = ObstacleShape::disc(Point::new(0.0, 0.0), 1.0);
        assert_eq!(t.placed(Point::new(0.3, 0.4), 0.1), ObstacleShape::disc(Point::new(0.3, 0.4), 0.1));
    }
}

use std::fmt;
use std::sync::Arc;

use super::element::StiffnessForm;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::{Mesh, Side};

/// Traction data `g` prescribed on the Σ sides.
#[derive(Clone)]
pub enum Traction {
    Constant(Point),
    /// Arbitrary traction as a function of the side and the boundary point.
    Custom(Arc<dyn Fn(Side, Point) -> Point + Send + Sync>),
}

impl Traction {
    pub fn at(&self, side: Side, p: Point) -> Point {
        match self {
            Traction::Constant(g) => *g,
            Traction::Custom(f) => f(side, p),
        }
    }
}

impl fmt::Debug for Traction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Traction::Constant(g) => f.debug_tuple("Constant").field(g).finish(),
            Traction::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Physical and numerical coefficients of the Stokes-Brinkmann problem.
#[derive(Clone, Debug)]
pub struct BrinkmannParams {
    /// Kinematic viscosity `ν > 0`.
    pub nu: f64,
    /// Inverse permeability `α > 0`.
    pub alpha: f64,
    /// Penalization constant `k` used inside obstacles.
    pub k_penalty: f64,
    pub traction: Traction,
    pub stiffness_form: StiffnessForm,
}

impl Default for BrinkmannParams {
    fn default() -> Self {
        Self {
            nu: 0.01,
            alpha: 1.0,
            k_penalty: 1e6,
            traction: Traction::Constant(Point::new(1.0, 0.0)),
            stiffness_form: StiffnessForm::Gradient,
        }
    }
}

impl BrinkmannParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be finite and positive, got {v}")))
            }
        };
        positive("nu", self.nu)?;
        positive("alpha", self.alpha)?;
        positive("k_penalty", self.k_penalty)?;
        if let Traction::Constant(g) = self.traction {
            if !g.is_finite() {
                return Err(Error::param("traction", "must be finite"));
            }
        }
        Ok(())
    }

    pub fn with_k_penalty(&self, k: f64) -> Self {
        Self {
            k_penalty: k,
            ..self.clone()
        }
    }

    pub fn with_traction(&self, traction: Traction) -> Self {
        Self {
            traction,
            ..self.clone()
        }
    }
}

/// Piecewise-constant extra reaction coefficient `δc`, one value per triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientField {
    values: Vec<f64>,
}

impl CoefficientField {
    pub fn zeros(mesh: &Mesh) -> Self {
        Self {
            values: vec![0.0; mesh.num_triangles()],
        }
    }

    pub fn from_values(mesh: &Mesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_triangles() {
            return Err(Error::DimensionMismatch(format!(
                "coefficient field has {} values, mesh has {} triangles",
                values.len(),
                mesh.num_triangles()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::param("dc", format!("coefficients must be finite and nonnegative, got {v}")));
        }
        Ok(Self { values })
    }

    /// `k` on the listed triangles, zero elsewhere.
    pub fn indicator(mesh: &Mesh, triangles: &[usize], k: f64) -> Result<Self> {
        let mut values = vec![0.0; mesh.num_triangles()];
        for &t in triangles {
            values[t] = k;
        }
        Self::from_values(mesh, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Triangles with a nonzero coefficient.
    pub fn support(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&t| self.values[t] != 0.0).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }
}

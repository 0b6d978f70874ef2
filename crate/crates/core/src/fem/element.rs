//! Element matrices of the Taylor-Hood (P2 velocity / P1 pressure) pair.
//!
//! Local velocity unknowns are interleaved: dof `2*i + c` is component `c`
//! of the velocity at local P2 node `i`.

use serde::{Deserialize, Serialize};

use super::basis::{p1_values, p2_gradients, p2_values, TriangleGeometry};
use super::quadrature::TriangleRule;
use crate::error::{Error, Result};
use crate::geometry::Point;

pub type Mat12 = [[f64; 12]; 12];

/// Which viscous operator the velocity block discretises.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StiffnessForm {
    /// `ν ∇ψ:∇v`; the natural condition is the pseudo-traction `ν∂ψ/∂n − p n`.
    #[default]
    Gradient,
    /// `2ν e(ψ):e(v)`; the natural condition is `σ(ψ,p) n`.
    SymmetricStrain,
}

#[derive(Clone, Debug)]
pub struct ElementMatrices {
    /// Viscous block, already scaled by `ν`.
    pub stiffness: Mat12,
    /// Zeroth-order block, already scaled by the reaction coefficient.
    pub mass: Mat12,
    /// `D[q][2j+c] = −∫ λ_q ∂_c φ_j`.
    pub divergence: [[f64; 12]; 3],
}

/// Computes the element blocks for the velocity operator
/// `ν ∇·∇ + (α + δc)` and the pressure coupling.
pub fn element_matrices(
    vertices: [Point; 3],
    nu: f64,
    reaction: f64,
    form: StiffnessForm,
) -> Result<ElementMatrices> {
    if !(nu >= 0.0) || !(reaction >= 0.0) {
        return Err(Error::param("coefficients", "element coefficients must be nonnegative"));
    }
    let geo = TriangleGeometry::new(vertices)?;
    let rule = TriangleRule::degree4();

    let mut stiffness = [[0.0; 12]; 12];
    let mut mass = [[0.0; 12]; 12];
    let mut divergence = [[0.0; 12]; 3];

    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let wa = w * geo.area;
        let phi = p2_values(*l);
        let dphi = p2_gradients(*l, &geo.grad_lambda);
        let psi = p1_values(*l);
        for i in 0..6 {
            for j in 0..6 {
                let gg = dphi[i].dot(dphi[j]);
                let m = wa * phi[i] * phi[j];
                for c in 0..2 {
                    stiffness[2 * i + c][2 * j + c] += wa * nu * gg;
                    mass[2 * i + c][2 * j + c] += reaction * m;
                }
                if form == StiffnessForm::SymmetricStrain {
                    // ∇u:∇vᵀ term: row (i, a), column (j, b) gets ∂_b φ_i ∂_a φ_j.
                    let di = [dphi[i].x, dphi[i].y];
                    let dj = [dphi[j].x, dphi[j].y];
                    for a in 0..2 {
                        for b in 0..2 {
                            stiffness[2 * i + a][2 * j + b] += wa * nu * di[b] * dj[a];
                        }
                    }
                }
            }
        }
        for q in 0..3 {
            for j in 0..6 {
                divergence[q][2 * j] -= wa * psi[q] * dphi[j].x;
                divergence[q][2 * j + 1] -= wa * psi[q] * dphi[j].y;
            }
        }
    }
    Ok(ElementMatrices {
        stiffness,
        mass,
        divergence,
    })
}

/// Scalar P1 mass matrix.
pub fn p1_mass(vertices: [Point; 3]) -> Result<[[f64; 3]; 3]> {
    let geo = TriangleGeometry::new(vertices)?;
    let rule = TriangleRule::degree4();
    let mut m = [[0.0; 3]; 3];
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += w * geo.area * l[i] * l[j];
            }
        }
    }
    Ok(m)
}

/// Scalar P1 stiffness matrix `∫ ∇λ_i·∇λ_j`.
pub fn p1_stiffness(vertices: [Point; 3]) -> Result<[[f64; 3]; 3]> {
    let geo = TriangleGeometry::new(vertices)?;
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = geo.area * geo.grad_lambda[i].dot(geo.grad_lambda[j]);
        }
    }
    Ok(k)
}

/// Scalar P2 mass matrix.
pub fn p2_mass(vertices: [Point; 3]) -> Result<[[f64; 6]; 6]> {
    let geo = TriangleGeometry::new(vertices)?;
    Ok(p2_mass_with(&geo))
}

pub(crate) fn p2_mass_with(geo: &TriangleGeometry) -> [[f64; 6]; 6] {
    let rule = TriangleRule::degree4();
    let mut m = [[0.0; 6]; 6];
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let phi = p2_values(*l);
        for i in 0..6 {
            for j in 0..6 {
                m[i][j] += w * geo.area * phi[i] * phi[j];
            }
        }
    }
    m
}

/// Scalar P2 stiffness matrix `∫ ∇φ_i·∇φ_j`.
pub fn p2_stiffness(vertices: [Point; 3]) -> Result<[[f64; 6]; 6]> {
    let geo = TriangleGeometry::new(vertices)?;
    Ok(p2_stiffness_with(&geo))
}

pub(crate) fn p2_stiffness_with(geo: &TriangleGeometry) -> [[f64; 6]; 6] {
    let rule = TriangleRule::degree4();
    let mut k = [[0.0; 6]; 6];
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let dphi = p2_gradients(*l, &geo.grad_lambda);
        for i in 0..6 {
            for j in 0..6 {
                k[i][j] += w * geo.area * dphi[i].dot(dphi[j]);
            }
        }
    }
    k
}

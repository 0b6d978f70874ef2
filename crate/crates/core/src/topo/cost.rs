use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::score::{error_e_with, truth_fractions};
use super::{level_set_region, LevelSetRegion, TopoGradientField};
use crate::brinkmann::{BrinkmannProblem, Measurement, ObstacleShape};
use crate::error::{Error, Result};
use crate::fem::norms::l2_norm_sq_on;
use crate::fem::CoefficientField;
use crate::geometry::Point;

/// Data misfit `∫_{Ω∖ω} |ψ(ω) − ψ^d|²` of the penalized solution for a
/// candidate region.
pub fn misfit_on(problem: &BrinkmannProblem<'_>, region: &LevelSetRegion, measurement: &Measurement) -> Result<f64> {
    let mesh = problem.mesh();
    let dc = CoefficientField::indicator(mesh, &region.triangles, problem.params().k_penalty)?;
    let (psi, _) = problem.solve_with_coefficient(&dc)?;
    let diff = psi.difference(&measurement.psi_d)?;
    l2_norm_sq_on(mesh, &diff, |t| !region.contains_triangle(t))
}

/// `J(ω) = ∫_{Ω∖ω} |ψ(ω) − ψ^d|² + ρ·P(ω)`.
pub fn cost_j(
    problem: &BrinkmannProblem<'_>,
    region: &LevelSetRegion,
    measurement: &Measurement,
    rho: f64,
) -> Result<f64> {
    check_rho(rho)?;
    Ok(misfit_on(problem, region, measurement)? + rho * region.perimeter)
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho >= 0.0 {
        Ok(())
    } else {
        Err(Error::param("rho", format!("must be finite and nonnegative, got {rho}")))
    }
}

/// Interior grid `γ_i = i/ℓ`, `i = 1, …, ℓ−1`.
pub fn gamma_grid(ell: usize) -> Result<Vec<f64>> {
    if ell < 2 {
        return Err(Error::param("ell", format!("grid needs at least 2 subintervals, got {ell}")));
    }
    Ok((1..ell).map(|i| i as f64 / ell as f64).collect())
}

/// One evaluated threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaRow {
    pub gamma: f64,
    pub j: f64,
    pub area: f64,
    pub perimeter: f64,
    pub triangles: usize,
    /// Error score against the true obstacle, when known.
    pub e: Option<f64>,
}

/// Size of a region that is reported but not scored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub gamma: f64,
    pub vertices: usize,
    pub triangles: usize,
    pub area: f64,
    pub perimeter: f64,
}

impl From<&LevelSetRegion> for RegionSummary {
    fn from(r: &LevelSetRegion) -> Self {
        Self {
            gamma: r.gamma,
            vertices: r.vertices.len(),
            triangles: r.triangles.len(),
            area: r.area,
            perimeter: r.perimeter,
        }
    }
}

/// Outcome of the threshold search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    /// `None` when no candidate region is nonempty ("no obstacle detected").
    pub gamma_star: Option<f64>,
    pub region: Option<LevelSetRegion>,
    pub rows: Vec<GammaRow>,
    pub e_value: Option<f64>,
    /// Location of the most negative `G`, when `G` has a negative value.
    pub recovered_center: Option<Point>,
    /// The bare argmin (`γ = 0`) and the full negative set (`γ = 1`).
    pub endpoints: [RegionSummary; 2],
}

impl ReconstructionResult {
    pub fn detected(&self) -> bool {
        self.gamma_star.is_some()
    }
}

/// Evaluates `J(ω_γ)` on the interior γ grid and picks the minimizer among
/// nonempty regions, lowest γ on ties.
///
/// Regions with identical triangle sets share one forward solve.
pub fn select_gamma_star(
    problem: &BrinkmannProblem<'_>,
    g: &TopoGradientField,
    measurement: &Measurement,
    ell: usize,
    rho: f64,
    truth: Option<&ObstacleShape>,
) -> Result<ReconstructionResult> {
    check_rho(rho)?;
    let grid = gamma_grid(ell)?;
    let mesh = problem.mesh();
    let fractions = match truth {
        Some(shape) if !shape.is_none() => Some(truth_fractions(mesh, shape)?),
        _ => None,
    };
    let mut cache: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut rows = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, LevelSetRegion, Option<f64>)> = None;
    for gamma in grid {
        let region = level_set_region(mesh, g, gamma)?;
        let misfit = match cache.get(&region.triangles) {
            Some(m) => *m,
            None => {
                let m = misfit_on(problem, &region, measurement)?;
                cache.insert(region.triangles.clone(), m);
                m
            }
        };
        let j = misfit + rho * region.perimeter;
        let e = match &fractions {
            Some(f) => Some(error_e_with(mesh, &region.triangles, f)?),
            None => None,
        };
        rows.push(GammaRow {
            gamma,
            j,
            area: region.area,
            perimeter: region.perimeter,
            triangles: region.triangles.len(),
            e,
        });
        if !region.is_empty() && best.as_ref().is_none_or(|(bj, _, _)| j < *bj) {
            best = Some((j, region, e));
        }
    }
    let endpoints = [
        RegionSummary::from(&level_set_region(mesh, g, 0.0)?),
        RegionSummary::from(&level_set_region(mesh, g, 1.0)?),
    ];
    let recovered_center = g.has_descent().then(|| g.min_location());
    Ok(match best {
        Some((_, region, e)) => ReconstructionResult {
            gamma_star: Some(region.gamma),
            e_value: e,
            region: Some(region),
            rows,
            recovered_center,
            endpoints,
        },
        None => ReconstructionResult {
            gamma_star: None,
            region: None,
            rows,
            e_value: None,
            recovered_center,
            endpoints,
        },
    })
}

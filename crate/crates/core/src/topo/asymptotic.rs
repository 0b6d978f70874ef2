use serde::{Deserialize, Serialize};

use crate::brinkmann::{obstacle_triangles, BrinkmannProblem, Measurement, ObstacleShape};
use crate::error::{Error, Result};
use crate::fem::norms::{h1_norm, l2_inner};
use crate::fem::{CoefficientField, VelocityField};
use crate::geometry::Point;

/// Fewest flagged triangles accepted for one perturbation.
const MIN_TRIANGLES: usize = 4;

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::DimensionMismatch("slope fit needs at least two paired samples".into()));
    }
    if xs.iter().chain(ys).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::param("samples", "log-log fit needs positive finite values"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::param("samples", "abscissae must not all coincide"));
    }
    Ok(sxy / sxx)
}

/// Perturbation `z + ε ω` and the triangles it flags, checked for
/// resolution.
fn perturbation(
    problem: &BrinkmannProblem<'_>,
    template: &ObstacleShape,
    z: Point,
    eps: f64,
) -> Result<(ObstacleShape, Vec<usize>)> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::param("eps", format!("must be positive, got {eps}")));
    }
    if template.is_none() {
        return Err(Error::InvalidShape("perturbation template must be a shape".into()));
    }
    let shape = template.placed(z, eps);
    shape.validate()?;
    let tris = obstacle_triangles(problem.mesh(), &shape);
    if tris.len() < MIN_TRIANGLES {
        return Err(Error::param(
            "eps",
            format!("ε = {eps} flags {} triangles; at least {MIN_TRIANGLES} are needed", tris.len()),
        ));
    }
    Ok((shape, tris))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSample {
    pub eps: f64,
    /// Area of the flagged triangles, the discrete `|ω| ε²`.
    pub flagged_area: f64,
    pub delta_j: f64,
    /// `(J(ε) − J(0)) / (k · flagged_area)`, which should approach `G(z)`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticCheck {
    pub z: Point,
    pub g_z: f64,
    pub k_penalty: f64,
    pub samples: Vec<AsymptoticSample>,
    /// Slope of `log |J(ε) − J(0)|` against `log ε`.
    pub slope: f64,
    /// Whether `J(ε) − J(0)` has the sign of `G(z)` for every ε.
    pub sign_agrees: bool,
}

/// Compares the cost change caused by small obstacles `z + ε ω` with the
/// first-order prediction `k |ω| ε² G(z)`.
///
/// The cost is the full-domain misfit `∫ |ψ_ε − ψ^d|²`; the perturbations
/// use the penalization `k_penalty`, independently of the problem's own.
pub fn asymptotic_check(
    problem: &BrinkmannProblem<'_>,
    measurement: &Measurement,
    theta0: &VelocityField,
    z: Point,
    eps_list: &[f64],
    template: &ObstacleShape,
    k_penalty: f64,
) -> Result<AsymptoticCheck> {
    if !(k_penalty.is_finite() && k_penalty > 0.0) {
        return Err(Error::param("k_penalty", format!("must be positive, got {k_penalty}")));
    }
    let mesh = problem.mesh();
    let (psi0, _) = problem.solve_direct()?;
    let g_z = psi0.evaluate(mesh, z)?.dot(theta0.evaluate(mesh, z)?);
    let mut samples = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let (_, tris) = perturbation(problem, template, z, eps)?;
        let dc = CoefficientField::indicator(mesh, &tris, k_penalty)?;
        let (psi, _) = problem.solve_with_coefficient(&dc)?;
        // |a − d|² − |b − d|² = (a − b)·(a + b − 2d), without cancellation.
        let change = psi.difference(&psi0)?;
        let mut sum = psi.clone();
        for ((s, b), d) in sum.values_mut().iter_mut().zip(psi0.values()).zip(measurement.psi_d.values()) {
            *s += b - 2.0 * d;
        }
        let delta_j = l2_inner(mesh, &change, &sum)?;
        let flagged_area = mesh.area_of(&tris);
        samples.push(AsymptoticSample {
            eps,
            flagged_area,
            delta_j,
            ratio: delta_j / (k_penalty * flagged_area),
        });
    }
    let eps: Vec<f64> = samples.iter().map(|s| s.eps).collect();
    let dj: Vec<f64> = samples.iter().map(|s| s.delta_j.abs()).collect();
    let slope = loglog_slope(&eps, &dj)?;
    let sign_agrees = samples.iter().all(|s| s.delta_j.signum() == g_z.signum() && s.delta_j != 0.0);
    Ok(AsymptoticCheck {
        z,
        g_z,
        k_penalty,
        samples,
        slope,
        sign_agrees,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaRate {
    pub center: Point,
    pub k_penalty: f64,
    /// `(ε, ‖ψ_ε − ψ₀‖_{H¹})`.
    pub samples: Vec<(f64, f64)>,
    pub slope: f64,
}

/// Rate at which the penalized solution approaches the unperturbed one as
/// the obstacle `center + ε ω` shrinks, in the `H¹` norm.
pub fn lemma_rate(
    problem: &BrinkmannProblem<'_>,
    center: Point,
    eps_list: &[f64],
    template: &ObstacleShape,
    k_penalty: f64,
) -> Result<LemmaRate> {
    if !(k_penalty.is_finite() && k_penalty > 0.0) {
        return Err(Error::param("k_penalty", format!("must be positive, got {k_penalty}")));
    }
    let mesh = problem.mesh();
    let (psi0, _) = problem.solve_direct()?;
    let mut samples = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let (_, tris) = perturbation(problem, template, center, eps)?;
        let dc = CoefficientField::indicator(mesh, &tris, k_penalty)?;
        let (psi, _) = problem.solve_with_coefficient(&dc)?;
        samples.push((eps, h1_norm(mesh, &psi.difference(&psi0)?)?));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
    Ok(LemmaRate {
        center,
        k_penalty,
        slope: loglog_slope(&xs, &ys)?,
        samples,
    })
}

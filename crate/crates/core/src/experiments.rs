//! Scenario runner: the one-shot pipeline, the size and noise sweeps and the
//! numerical verification checks.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::brinkmann::{
    add_noise, obstacle_triangles, transfer_field, BrinkmannProblem, Measurement, ObstacleShape,
};
use crate::error::{Error, Result};
use crate::fem::norms::l2_norm_sq_on;
use crate::fem::{body_force_load, BodyForce, BrinkmannParams, PressureField, Traction, VelocityField};
use crate::geometry::Point;
use crate::mesh::{BoundaryPartition, Mesh};
use crate::topo::{
    asymptotic_check, lemma_rate, select_gamma_star, topological_gradient, AsymptoticCheck, LemmaRate,
    ReconstructionResult, TopoGradientField,
};

/// Center distance above which a noisy reconstruction counts as degraded.
pub const DETECTION_RADIUS: f64 = 0.1;

/// Everything that determines one reconstruction.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub n: usize,
    pub partition: BoundaryPartition,
    pub params: BrinkmannParams,
    pub truth: ObstacleShape,
    /// Relative noise level δ.
    pub noise: f64,
    pub seed: u64,
    /// Number of γ subintervals.
    pub ell: usize,
    /// Perimeter weight in the cost.
    pub rho: f64,
    /// Generate the data on a different mesh and interpolate it.
    pub data_n: Option<usize>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "default".into(),
            n: 100,
            partition: BoundaryPartition::default(),
            params: BrinkmannParams::default(),
            truth: ObstacleShape::None,
            noise: 0.0,
            seed: 0,
            ell: 20,
            rho: 0.0,
            data_n: None,
        }
    }
}

impl Scenario {
    /// Disc of radius 0.05 at the center of the square.
    pub fn example_disc() -> Self {
        Self {
            name: "disc".into(),
            truth: ObstacleShape::disc(Point::new(0.5, 0.5), 0.05),
            ..Self::default()
        }
    }

    /// Ellipse with semi-axes (0.1, 0.05) at the center of the square.
    pub fn example_ellipse() -> Self {
        Self {
            name: "ellipse".into(),
            truth: ObstacleShape::ellipse(Point::new(0.5, 0.5), [0.1, 0.05], 0.0),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::param("n", format!("mesh needs n ≥ 2, got {}", self.n)));
        }
        if let Some(m) = self.data_n {
            if m < 2 {
                return Err(Error::param("data_n", format!("mesh needs n ≥ 2, got {m}")));
            }
        }
        self.params.validate()?;
        self.truth.validate()?;
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::param("noise", format!("must be nonnegative, got {}", self.noise)));
        }
        if self.ell < 2 {
            return Err(Error::param("ell", format!("grid needs at least 2 subintervals, got {}", self.ell)));
        }
        if !(self.rho.is_finite() && self.rho >= 0.0) {
            return Err(Error::param("rho", format!("must be nonnegative, got {}", self.rho)));
        }
        Ok(())
    }

    pub fn mesh(&self) -> Result<Mesh> {
        Mesh::unit_square(self.n, self.partition.clone())
    }

    /// Key/value summary used as the header of exported reports.
    pub fn echo(&self) -> Vec<(String, String)> {
        let traction = match &self.params.traction {
            Traction::Constant(g) => format!("{} {}", g.x, g.y),
            Traction::Custom(_) => "custom".into(),
        };
        let sigma: Vec<String> = self.partition.sigma_sides().iter().map(|s| s.to_string()).collect();
        vec![
            ("name".into(), self.name.clone()),
            ("n".into(), self.n.to_string()),
            ("sigma".into(), sigma.join(" ")),
            ("nu".into(), self.params.nu.to_string()),
            ("alpha".into(), self.params.alpha.to_string()),
            ("k_penalty".into(), self.params.k_penalty.to_string()),
            ("traction".into(), traction),
            ("stiffness_form".into(), format!("{:?}", self.params.stiffness_form)),
            ("truth".into(), describe_shape(&self.truth)),
            ("noise".into(), self.noise.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("ell".into(), self.ell.to_string()),
            ("rho".into(), self.rho.to_string()),
            (
                "data_n".into(),
                self.data_n.map(|m| m.to_string()).unwrap_or_default(),
            ),
        ]
    }
}

fn describe_shape(shape: &ObstacleShape) -> String {
    match *shape {
        ObstacleShape::None => "none".into(),
        ObstacleShape::Disc { center, radius } => format!("disc center=({} {}) radius={radius}", center.x, center.y),
        ObstacleShape::Ellipse {
            center,
            semi_axes,
            rotation,
        } => format!(
            "ellipse center=({} {}) semi_axes=({} {}) rotation={rotation}",
            center.x, center.y, semi_axes[0], semi_axes[1]
        ),
    }
}

/// Wall-clock duration of one pipeline stage. Not part of any export.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Fields produced by a run, for export.
#[derive(Clone, Debug)]
pub struct RunFields {
    pub psi0: VelocityField,
    pub p0: PressureField,
    pub theta0: VelocityField,
    pub psi_d: VelocityField,
    pub gradient: TopoGradientField,
}

/// Result of one scenario.
#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub echo: Vec<(String, String)>,
    pub g_min: f64,
    pub g_min_location: Point,
    pub g_max_abs: f64,
    pub reconstruction: ReconstructionResult,
    /// Distance from the recovered center to the true center.
    pub center_error: Option<f64>,
    pub timings: Vec<StageTiming>,
    pub fields: RunFields,
}

impl ExperimentReport {
    pub fn detected(&self) -> bool {
        self.reconstruction.detected()
    }

    pub fn e_value(&self) -> Option<f64> {
        self.reconstruction.e_value
    }

    /// Human-readable detection outcome.
    pub fn status(&self) -> &'static str {
        if self.detected() {
            "obstacle detected"
        } else {
            "no obstacle detected"
        }
    }

    /// Key/value block with the scenario and the headline results.
    pub fn header(&self) -> Vec<(String, String)> {
        let fmt = |v: f64| format!("{v:.8e}");
        let r = &self.reconstruction;
        let mut out = self.echo.clone();
        out.push(("status".into(), self.status().into()));
        out.push(("gamma_star".into(), r.gamma_star.map(fmt).unwrap_or_default()));
        out.push(("E".into(), r.e_value.map(fmt).unwrap_or_default()));
        out.push(("G_min".into(), fmt(self.g_min)));
        out.push((
            "G_min_location".into(),
            format!("{} {}", fmt(self.g_min_location.x), fmt(self.g_min_location.y)),
        ));
        out.push((
            "recovered_center".into(),
            r.recovered_center
                .map(|c| format!("{} {}", fmt(c.x), fmt(c.y)))
                .unwrap_or_default(),
        ));
        out.push(("center_error".into(), self.center_error.map(fmt).unwrap_or_default()));
        out
    }
}

struct Stopwatch {
    timings: Vec<StageTiming>,
}

impl Stopwatch {
    fn stage<T>(&mut self, stage: &'static str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f().map_err(|e| e.in_stage(stage))?;
        self.timings.push(StageTiming {
            stage: stage.into(),
            seconds: start.elapsed().as_secs_f64(),
        });
        Ok(out)
    }
}

/// Synthetic measurement for a scenario on the inversion problem's mesh.
fn measurement(problem: &BrinkmannProblem<'_>, scenario: &Scenario) -> Result<Measurement> {
    match scenario.data_n {
        Some(m) if m != scenario.n => {
            let data_mesh = Mesh::unit_square(m, scenario.partition.clone())?;
            let data_problem = BrinkmannProblem::new(&data_mesh, &scenario.params)?;
            let (clean, _) = data_problem.solve_with_obstacle(&scenario.truth)?;
            let moved = transfer_field(&clean, &data_mesh, problem.mesh())?;
            Ok(Measurement {
                psi_d: add_noise(&moved, scenario.noise, scenario.seed)?,
                noise_level: scenario.noise,
            })
        }
        _ => problem.make_measurement(&scenario.truth, scenario.noise, scenario.seed),
    }
}

/// One-shot pipeline on an existing problem: data, direct solve, adjoint
/// solve, gradient, threshold search.
fn run_on(problem: &BrinkmannProblem<'_>, scenario: &Scenario, mut watch: Stopwatch) -> Result<ExperimentReport> {
    let mesh = problem.mesh();
    let meas = watch.stage("data", || measurement(problem, scenario))?;
    let (psi0, p0) = watch.stage("direct", || problem.solve_direct())?;
    let theta0 = watch.stage("adjoint", || problem.solve_adjoint(&psi0, &meas))?;
    let gradient = watch.stage("gradient", || topological_gradient(mesh, &psi0, &theta0))?;
    let truth = (!scenario.truth.is_none()).then_some(&scenario.truth);
    let reconstruction = watch.stage("search", || {
        select_gamma_star(problem, &gradient, &meas, scenario.ell, scenario.rho, truth)
    })?;
    let center_error = match (reconstruction.recovered_center, scenario.truth.center()) {
        (Some(c), Some(t)) => Some(c.distance(t)),
        _ => None,
    };
    Ok(ExperimentReport {
        echo: scenario.echo(),
        g_min: gradient.min_value(),
        g_min_location: gradient.min_location(),
        g_max_abs: gradient.max_abs(),
        reconstruction,
        center_error,
        timings: watch.timings,
        fields: RunFields {
            psi0,
            p0,
            theta0,
            psi_d: meas.psi_d,
            gradient,
        },
    })
}

pub fn run_one_shot(scenario: &Scenario) -> Result<ExperimentReport> {
    scenario.validate()?;
    let mut watch = Stopwatch { timings: Vec::new() };
    let mesh = watch.stage("mesh", || scenario.mesh())?;
    let problem = watch.stage("factorize", || BrinkmannProblem::new(&mesh, &scenario.params))?;
    run_on(&problem, scenario, watch)
}

/// Runs `variants` of one scenario that share mesh and parameters, reusing
/// the factorization.
fn run_variants(base: &Scenario, variants: Vec<Scenario>) -> Result<Vec<ExperimentReport>> {
    if variants.is_empty() {
        return Ok(Vec::new());
    }
    base.validate()?;
    let mesh = base.mesh()?;
    let problem = BrinkmannProblem::new(&mesh, &base.params).map_err(|e| e.in_stage("factorize"))?;
    variants
        .iter()
        .map(|s| {
            s.validate()?;
            run_on(&problem, s, Stopwatch { timings: Vec::new() })
        })
        .collect()
}

/// One report per radius, discs centered where the base truth is (or at the
/// middle of the square).
pub fn size_sweep(base: &Scenario, radii: &[f64]) -> Result<Vec<ExperimentReport>> {
    let center = base.truth.center().unwrap_or(Point::new(0.5, 0.5));
    let variants = radii
        .iter()
        .map(|&r| Scenario {
            name: format!("{}-r{r}", base.name),
            truth: ObstacleShape::disc(center, r),
            ..base.clone()
        })
        .collect();
    run_variants(base, variants)
}

/// One entry of a noise sweep.
#[derive(Clone, Debug)]
pub struct NoiseEntry {
    pub delta: f64,
    pub report: ExperimentReport,
    /// No detection, a recovered center farther than [`DETECTION_RADIUS`]
    /// from the truth, or a region scoring no better than the empty set
    /// (`E >= 1`).
    pub degraded: bool,
}

/// One report per noise level, all with the base seed.
pub fn noise_sweep(base: &Scenario, deltas: &[f64]) -> Result<Vec<NoiseEntry>> {
    let variants = deltas
        .iter()
        .map(|&d| Scenario {
            name: format!("{}-noise{d}", base.name),
            noise: d,
            ..base.clone()
        })
        .collect();
    let reports = run_variants(base, variants)?;
    Ok(deltas
        .iter()
        .zip(reports)
        .map(|(&delta, report)| NoiseEntry {
            delta,
            degraded: !report.detected()
                || report.center_error.is_none_or(|e| e > DETECTION_RADIUS)
                || report.e_value().is_some_and(|e| e >= 1.0),
            report,
        })
        .collect())
}

/// Settings of the verification checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    /// Penalization of the small test obstacles; small enough that the
    /// perturbation stays in the linear regime.
    pub k_penalty: f64,
    pub eps: Vec<f64>,
    /// Test points for the expansion; when empty, the most negative and
    /// most positive admissible vertices of `G` are used.
    pub points: Vec<Point>,
    pub lemma_eps: Vec<f64>,
    pub lemma_center: Point,
    pub slope_range: [f64; 2],
    pub lemma_min_slope: f64,
    pub penalties: Vec<f64>,
    pub adjoint_vectors: usize,
    pub adjoint_tolerance: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            k_penalty: 0.1,
            eps: vec![0.05, 0.075, 0.1],
            points: Vec::new(),
            lemma_eps: vec![0.025, 0.05, 0.1],
            lemma_center: Point::new(0.5, 0.5),
            slope_range: [1.7, 2.3],
            lemma_min_slope: 1.0,
            penalties: vec![1e2, 1e4, 1e6, 1e8],
            adjoint_vectors: 20,
            adjoint_tolerance: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationItem {
    pub name: String,
    pub measured: String,
    pub tolerance: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationSummary {
    pub items: Vec<VerificationItem>,
    pub asymptotic: Vec<AsymptoticCheck>,
    pub lemma: Option<LemmaRate>,
}

impl VerificationSummary {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }
}

/// Largest relative violation of `A₀(w, ϑ₀) + 2∫(ψ₀ − ψ^d)·w = 0` over
/// random discretely divergence-free `w` vanishing on Γ.
pub fn adjoint_identity_residual(
    problem: &BrinkmannProblem<'_>,
    measurement: &Measurement,
    vectors: usize,
    seed: u64,
) -> Result<f64> {
    let mesh = problem.mesh();
    let (psi0, _) = problem.solve_direct()?;
    let theta = problem.solve_adjoint(&psi0, measurement)?;
    let misfit = psi0.difference(&measurement.psi_d)?;
    let m_misfit = body_force_load(mesh, BodyForce::Nodal(&misfit))?;
    let a = &problem.base_system().velocity_block;
    let zero_p = vec![0.0; mesh.num_vertices()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..vectors {
        let values: Vec<f64> = (0..2 * mesh.num_nodes()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let force = VelocityField::from_values(mesh, values)?;
        let load = body_force_load(mesh, BodyForce::Nodal(&force))?;
        let (w, _) = problem.base_solver().solve_raw(&load, &zero_p)?;
        let lhs = a.bilinear(&w, theta.values());
        let rhs: f64 = 2.0 * w.iter().zip(&m_misfit).map(|(x, y)| x * y).sum::<f64>();
        let scale = lhs.abs().max(rhs.abs());
        let rel = if scale == 0.0 { 0.0 } else { (lhs + rhs).abs() / scale };
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// Test points for the expansion: the extreme values of `G` among vertices
/// whose largest test obstacle fits in the square, stays clear of the true
/// obstacle and covers no sign change of `G`.
fn default_points(mesh: &Mesh, g: &TopoGradientField, truth: &ObstacleShape, eps_max: f64) -> Vec<Point> {
    let h = mesh.h();
    let margin = eps_max + 2.0 * h;
    let (ex, ey) = truth.half_extent();
    let reach = ex.max(ey);
    let n = mesh.n();
    let span = ((eps_max + h) / h).ceil() as usize;
    let sign_definite = |i: usize, j: usize| {
        let s = g.values()[mesh.vertex_index(i, j)].signum();
        let z = mesh.vertices()[mesh.vertex_index(i, j)];
        (i.saturating_sub(span)..=(i + span).min(n)).all(|a| {
            (j.saturating_sub(span)..=(j + span).min(n)).all(|b| {
                let v = mesh.vertex_index(a, b);
                mesh.vertices()[v].distance(z) > eps_max + h || g.values()[v].signum() == s
            })
        })
    };
    let admissible = |p: Point| {
        p.x > margin
            && p.x < 1.0 - margin
            && p.y > margin
            && p.y < 1.0 - margin
            && truth.center().is_none_or(|c| c.distance(p) > reach + margin)
    };
    let mut lo: Option<usize> = None;
    let mut hi: Option<usize> = None;
    for j in 0..=n {
        for i in 0..=n {
            let v = mesh.vertex_index(i, j);
            let val = g.values()[v];
            if val == 0.0 || !admissible(mesh.vertices()[v]) || !sign_definite(i, j) {
                continue;
            }
            if lo.is_none_or(|k| val < g.values()[k]) {
                lo = Some(v);
            }
            if hi.is_none_or(|k| val > g.values()[k]) {
                hi = Some(v);
            }
        }
    }
    let mut out = Vec::new();
    if let Some(v) = lo.filter(|&v| g.values()[v] < 0.0) {
        out.push(mesh.vertices()[v]);
    }
    if let Some(v) = hi.filter(|&v| g.values()[v] > 0.0) {
        out.push(mesh.vertices()[v]);
    }
    out
}

/// Expansion slope and sign, first-order rate of the penalized solution,
/// penalization monotonicity, adjoint identity and the zero-misfit case.
pub fn verification_suite(scenario: &Scenario, options: &VerifyOptions) -> Result<VerificationSummary> {
    scenario.validate()?;
    let mesh = scenario.mesh()?;
    let problem = BrinkmannProblem::new(&mesh, &scenario.params).map_err(|e| e.in_stage("factorize"))?;
    let meas = measurement(&problem, scenario).map_err(|e| e.in_stage("data"))?;
    let (psi0, _) = problem.solve_direct().map_err(|e| e.in_stage("direct"))?;
    let theta0 = problem.solve_adjoint(&psi0, &meas).map_err(|e| e.in_stage("adjoint"))?;
    let g = topological_gradient(&mesh, &psi0, &theta0)?;
    let mut items = Vec::new();

    // Expansion of the cost for small obstacles.
    let template = ObstacleShape::disc(Point::default(), 1.0);
    let eps_max = options.eps.iter().copied().fold(0.0, f64::max);
    let points = if options.points.is_empty() {
        default_points(&mesh, &g, &scenario.truth, eps_max)
    } else {
        options.points.clone()
    };
    if points.is_empty() {
        items.push(VerificationItem {
            name: "expansion".into(),
            measured: "no admissible test point with G ≠ 0".into(),
            tolerance: "at least one point".into(),
            passed: false,
        });
    }
    let mut asymptotic = Vec::new();
    for z in points {
        let check = asymptotic_check(&problem, &meas, &theta0, z, &options.eps, &template, options.k_penalty)
            .map_err(|e| e.in_stage("asymptotic"))?;
        let [lo, hi] = options.slope_range;
        items.push(VerificationItem {
            name: format!("expansion slope at ({:.3}, {:.3})", z.x, z.y),
            measured: format!("{:.4}", check.slope),
            tolerance: format!("[{lo}, {hi}]"),
            passed: (lo..=hi).contains(&check.slope),
        });
        items.push(VerificationItem {
            name: format!("expansion sign at ({:.3}, {:.3})", z.x, z.y),
            measured: format!(
                "G(z) = {:.4e}, ΔJ = [{}]",
                check.g_z,
                check
                    .samples
                    .iter()
                    .map(|s| format!("{:.4e}", s.delta_j))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            tolerance: "sign(ΔJ) = sign(G(z))".into(),
            passed: check.sign_agrees,
        });
        asymptotic.push(check);
    }

    // Convergence of the penalized solution as the obstacle shrinks.
    let lemma = lemma_rate(&problem, options.lemma_center, &options.lemma_eps, &template, options.k_penalty)
        .map_err(|e| e.in_stage("lemma"))?;
    items.push(VerificationItem {
        name: "H1 rate of the perturbed solution".into(),
        measured: format!("{:.4}", lemma.slope),
        tolerance: format!("≥ {}", options.lemma_min_slope),
        passed: lemma.slope >= options.lemma_min_slope,
    });

    // Velocity inside an obstacle decreases with the penalization.
    let obstacle = if scenario.truth.is_none() {
        ObstacleShape::disc(Point::new(0.5, 0.5), 0.1)
    } else {
        scenario.truth
    };
    let tris = obstacle_triangles(&mesh, &obstacle);
    let mut norms = Vec::new();
    for &k in &options.penalties {
        let dc = crate::fem::CoefficientField::indicator(&mesh, &tris, k)?;
        let (psi, _) = problem.solve_with_coefficient(&dc).map_err(|e| e.in_stage("penalization"))?;
        norms.push(l2_norm_sq_on(&mesh, &psi, |t| tris.binary_search(&t).is_ok())?.sqrt());
    }
    items.push(VerificationItem {
        name: "penalization monotonicity".into(),
        measured: norms.iter().map(|v| format!("{v:.4e}")).collect::<Vec<_>>().join(" > "),
        tolerance: "strictly decreasing in k".into(),
        passed: !tris.is_empty() && norms.windows(2).all(|w| w[1] < w[0]),
    });

    // Adjoint identity for the scenario's data and for exact data.
    let residual = adjoint_identity_residual(&problem, &meas, options.adjoint_vectors, scenario.seed)
        .map_err(|e| e.in_stage("adjoint identity"))?;
    items.push(VerificationItem {
        name: "adjoint identity".into(),
        measured: format!("{residual:.3e}"),
        tolerance: format!("< {:e}", options.adjoint_tolerance),
        passed: residual < options.adjoint_tolerance,
    });
    let exact = Measurement {
        psi_d: psi0.clone(),
        noise_level: 0.0,
    };
    let theta_exact = problem.solve_adjoint(&psi0, &exact)?;
    let g_exact = topological_gradient(&mesh, &psi0, &theta_exact)?;
    let bound = 1e-9 * psi0.max_abs().powi(2);
    items.push(VerificationItem {
        name: "zero misfit gives zero gradient".into(),
        measured: format!("max |G| = {:.3e}", g_exact.max_abs()),
        tolerance: format!("< {bound:.3e}"),
        passed: g_exact.max_abs() < bound && !g_exact.has_descent(),
    });

    Ok(VerificationSummary {
        items,
        asymptotic,
        lemma: Some(lemma),
    })
}

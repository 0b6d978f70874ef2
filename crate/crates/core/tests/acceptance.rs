//! Acceptance checks for the full pipeline. Prints one PASS/FAIL line per
//! criterion and exits with failure if any criterion fails.

mod common;

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use topograd::brinkmann::{BrinkmannProblem, ObstacleShape};
use topograd::experiments::{
    adjoint_identity_residual, noise_sweep, run_one_shot, size_sweep, verification_suite, ExperimentReport, Scenario,
    VerifyOptions,
};
use topograd::fem::BrinkmannParams;
use topograd::io::{export_run, ExportToggles};
use topograd::mesh::Mesh;
use topograd::topo::{asymptotic_check, lemma_rate, topological_gradient, truth_fractions};
use topograd::Point;

const DEGENERATE_G_TOL: f64 = 1e-9;
const DEGENERATE_SECONDS: f64 = 30.0;
const ADJOINT_VECTORS: usize = 20;
const ADJOINT_TOL: f64 = 1e-9;
const MMS_SIZES: [usize; 3] = [8, 16, 32];
const MMS_VELOCITY_ORDER: f64 = 2.9;
const MMS_PRESSURE_ORDER: f64 = 1.9;
const LEMMA_EPS: [f64; 3] = [0.025, 0.05, 0.1];
const LEMMA_MIN_SLOPE: f64 = 1.0;
const EXPANSION_EPS: [f64; 3] = [0.05, 0.075, 0.1];
const EXPANSION_SLOPE: [f64; 2] = [1.7, 2.3];
const EXPANSION_SECONDS: f64 = 300.0;
const DISC_CENTER_TOL: f64 = 0.02;
const DISC_MAX_E: f64 = 0.6;
const DISC_SECONDS: f64 = 600.0;
const NOISE_CENTER_TOL: f64 = 0.1;
const ORACLE_POINTS_PER_SIDE: usize = 1000;
const ORACLE_REL_TOL: f64 = 0.02;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn criterion(id: usize, name: &str, results: &mut Vec<bool>, check: impl FnOnce() -> topograd::Result<Outcome>) {
    let start = Instant::now();
    let o = check().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
    let status = if o.passed { "PASS" } else { "FAIL" };
    println!(
        "{status} [{id:>2}] {name}: {} ({:.1} s)",
        o.detail,
        start.elapsed().as_secs_f64()
    );
    results.push(o.passed);
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn degenerate() -> topograd::Result<Outcome> {
    let start = Instant::now();
    let report = run_one_shot(&Scenario::default())?;
    let seconds = start.elapsed().as_secs_f64();
    let psi_max = report.fields.psi0.max_abs();
    let theta_max = report.fields.theta0.max_abs();
    let bound = DEGENERATE_G_TOL * psi_max * psi_max;
    let passed = theta_max == 0.0
        && report.g_max_abs < bound
        && report.status() == "no obstacle detected"
        && seconds < DEGENERATE_SECONDS;
    Ok(outcome(
        passed,
        format!(
            "max|theta0| = {theta_max:.3e}, max|G| = {:.3e} < {bound:.3e}, \"{}\", {seconds:.1} s < {DEGENERATE_SECONDS} s",
            report.g_max_abs,
            report.status()
        ),
    ))
}

fn adjoint(problem: &BrinkmannProblem<'_>, scenario: &Scenario) -> topograd::Result<Outcome> {
    let meas = problem.make_measurement(&scenario.truth, scenario.noise, scenario.seed)?;
    let worst = adjoint_identity_residual(problem, &meas, ADJOINT_VECTORS, 7)?;
    Ok(outcome(
        worst < ADJOINT_TOL,
        format!("worst relative residual over {ADJOINT_VECTORS} vectors {worst:.3e} < {ADJOINT_TOL:e}"),
    ))
}

fn manufactured() -> topograd::Result<Outcome> {
    let p = BrinkmannParams::default();
    let errs: Vec<(f64, f64)> = MMS_SIZES.iter().map(|&n| common::mms_errors(n, p.nu, p.alpha)).collect();
    let hs: Vec<f64> = MMS_SIZES.iter().map(|&n| 1.0 / n as f64).collect();
    let ru = slope(&hs, &errs.iter().map(|e| e.0).collect::<Vec<_>>());
    let rp = slope(&hs, &errs.iter().map(|e| e.1).collect::<Vec<_>>());
    Ok(outcome(
        ru >= MMS_VELOCITY_ORDER && rp >= MMS_PRESSURE_ORDER,
        format!("velocity order {ru:.3} >= {MMS_VELOCITY_ORDER}, pressure order {rp:.3} >= {MMS_PRESSURE_ORDER}"),
    ))
}

fn lemma(problem: &BrinkmannProblem<'_>) -> topograd::Result<Outcome> {
    let k = VerifyOptions::default().k_penalty;
    let template = ObstacleShape::disc(Point::default(), 1.0);
    let rate = lemma_rate(problem, Point::new(0.5, 0.5), &LEMMA_EPS, &template, k)?;
    Ok(outcome(
        rate.slope >= LEMMA_MIN_SLOPE,
        format!("H1 slope {:.3} >= {LEMMA_MIN_SLOPE} (k = {k})", rate.slope),
    ))
}

/// Most positive vertex of `G` whose largest test disc stays inside the
/// square and away from the truth.
fn positive_point(mesh: &Mesh, g: &[f64], truth: &ObstacleShape) -> Option<Point> {
    let margin = 0.1 + 2.0 * mesh.h();
    let c = truth.center()?;
    mesh.vertices()
        .iter()
        .zip(g)
        .filter(|(p, v)| {
            **v > 0.0
                && p.x > margin
                && p.x < 1.0 - margin
                && p.y > margin
                && p.y < 1.0 - margin
                && c.distance(**p) > 0.2 + margin
        })
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(p, _)| *p)
}

fn expansion(problem: &BrinkmannProblem<'_>, scenario: &Scenario) -> topograd::Result<Outcome> {
    let start = Instant::now();
    let options = VerifyOptions::default();
    let summary = verification_suite(scenario, &options)?;
    let mut passed = !summary.asymptotic.is_empty();
    let mut parts = Vec::new();
    for check in &summary.asymptotic {
        let ok = check.slope >= EXPANSION_SLOPE[0] && check.slope <= EXPANSION_SLOPE[1] && check.sign_agrees;
        passed &= ok;
        parts.push(format!(
            "slope {:.3} at ({:.2}, {:.2}) with sign agreement {}",
            check.slope, check.z.x, check.z.y, check.sign_agrees
        ));
    }
    // Sign agreement where G is positive as well.
    let meas = problem.make_measurement(&scenario.truth, scenario.noise, scenario.seed)?;
    let (psi0, _) = problem.solve_direct()?;
    let theta0 = problem.solve_adjoint(&psi0, &meas)?;
    let g = topological_gradient(problem.mesh(), &psi0, &theta0)?;
    if let Some(z) = positive_point(problem.mesh(), g.values(), &scenario.truth) {
        let template = ObstacleShape::disc(Point::default(), 1.0);
        let check = asymptotic_check(problem, &meas, &theta0, z, &EXPANSION_EPS, &template, options.k_penalty)?;
        passed &= check.sign_agrees;
        parts.push(format!(
            "sign agreement {} at ({:.2}, {:.2}) where G = {:.3e}",
            check.sign_agrees, z.x, z.y, check.g_z
        ));
    }
    let seconds = start.elapsed().as_secs_f64();
    passed &= seconds < EXPANSION_SECONDS;
    Ok(outcome(
        passed,
        format!(
            "{} in [{}, {}], {seconds:.1} s < {EXPANSION_SECONDS} s",
            parts.join("; "),
            EXPANSION_SLOPE[0],
            EXPANSION_SLOPE[1]
        ),
    ))
}

fn centered_disc(report: &ExperimentReport, seconds: f64) -> topograd::Result<Outcome> {
    let r = &report.reconstruction;
    let center = report.center_error.unwrap_or(f64::INFINITY);
    let e = report.e_value().unwrap_or(f64::INFINITY);
    let gamma = r.gamma_star.unwrap_or(f64::NAN);
    let passed =
        center <= DISC_CENTER_TOL && e < DISC_MAX_E && gamma > 0.0 && gamma < 1.0 && seconds < DISC_SECONDS;
    Ok(outcome(
        passed,
        format!(
            "center error {center:.4} <= {DISC_CENTER_TOL}, E = {e:.4} < {DISC_MAX_E}, gamma* = {gamma}, {seconds:.1} s < {DISC_SECONDS} s"
        ),
    ))
}

fn size_trend(scenario: &Scenario) -> topograd::Result<Outcome> {
    let radii = [0.03, 0.06, 0.18];
    let reports = size_sweep(scenario, &radii)?;
    let e: Vec<f64> = reports.iter().map(|r| r.e_value().unwrap_or(f64::NAN)).collect();
    Ok(outcome(
        e[2] > e[0] && e[2] > e[1],
        format!("E(0.18) = {:.4} > E(0.03) = {:.4}, E(0.06) = {:.4}", e[2], e[0], e[1]),
    ))
}

fn noise(scenario: &Scenario) -> topograd::Result<Outcome> {
    let deltas = [0.05, 0.1, 0.2, 0.3];
    let entries = noise_sweep(scenario, &deltas)?;
    let mut passed = entries.len() == deltas.len();
    let mut parts = Vec::new();
    for entry in &entries {
        let center = entry.report.center_error.unwrap_or(f64::INFINITY);
        if entry.delta < 0.25 {
            passed &= center <= NOISE_CENTER_TOL;
        }
        parts.push(format!(
            "delta {}: center error {center:.4}, E = {:.3}, degraded = {}",
            entry.delta,
            entry.report.e_value().unwrap_or(f64::NAN),
            entry.degraded
        ));
    }
    Ok(outcome(passed, format!("{} (tolerance {NOISE_CENTER_TOL} for delta <= 0.2)", parts.join("; "))))
}

fn determinism() -> topograd::Result<Outcome> {
    let scenarios = [
        Scenario {
            n: 24,
            noise: 0.1,
            seed: 11,
            ..Scenario::example_disc()
        },
        Scenario {
            n: 24,
            ..Scenario::example_ellipse()
        },
    ];
    let mut identical = true;
    let mut files = 0;
    for scenario in &scenarios {
        let mesh = scenario.mesh()?;
        let mut outputs = Vec::new();
        for _ in 0..2 {
            let dir = tempfile::tempdir().map_err(|e| topograd::Error::Io { path: std::env::temp_dir(), source: e })?;
            let report = run_one_shot(scenario)?;
            let paths = export_run(&mesh, &report, &ExportToggles::default(), dir.path(), &scenario.name)?;
            let bytes: Vec<Vec<u8>> = paths
                .iter()
                .map(|p| fs::read(p).map_err(|e| topograd::Error::Io { path: p.clone(), source: e }))
                .collect::<topograd::Result<_>>()?;
            outputs.push(bytes);
        }
        files += outputs[0].len();
        identical &= !outputs[0].is_empty() && outputs[0] == outputs[1];
    }
    Ok(outcome(identical, format!("{files} CSV/VTK files byte-identical across two runs: {identical}")))
}

fn oracle(mesh: &Mesh, report: &ExperimentReport, truth: &ObstacleShape) -> topograd::Result<Outcome> {
    let Some(region) = &report.reconstruction.region else {
        return Ok(outcome(false, "no region to compare"));
    };
    let m = ORACLE_POINTS_PER_SIDE;
    let (mut in_region, mut in_truth, mut in_both) = (0usize, 0usize, 0usize);
    for i in 0..m {
        for j in 0..m {
            let p = Point::new((i as f64 + 0.5) / m as f64, (j as f64 + 0.25) / m as f64);
            let r = region.contains_triangle(mesh.locate_point(p)?.triangle);
            let t = truth.contains(p);
            in_region += r as usize;
            in_truth += t as usize;
            in_both += (r && t) as usize;
        }
    }
    let total = (m * m) as f64;
    let area_oracle = in_region as f64 / total;
    let e_oracle = (in_region + in_truth - 2 * in_both) as f64 / in_truth as f64;
    let e = report.e_value().unwrap_or(f64::NAN);
    // The truth measure used by the score, for reference.
    let fractions = truth_fractions(mesh, truth)?;
    let truth_q: f64 = fractions.iter().enumerate().map(|(t, f)| f * mesh.triangle_area(t)).sum();
    let area_rel = (region.area - area_oracle).abs() / area_oracle;
    let e_rel = (e - e_oracle).abs() / e_oracle;
    Ok(outcome(
        area_rel < ORACLE_REL_TOL && e_rel < ORACLE_REL_TOL,
        format!(
            "area {:.5e} vs {area_oracle:.5e} (rel {area_rel:.2e}), E {e:.4} vs {e_oracle:.4} (rel {e_rel:.2e}), truth {truth_q:.5e} vs {:.5e}, tolerance {ORACLE_REL_TOL}",
            region.area,
            in_truth as f64 / total
        ),
    ))
}

fn main() -> ExitCode {
    let mut results = Vec::new();
    let scenario = Scenario::example_disc();
    let mesh = scenario.mesh().expect("example mesh");
    let problem = BrinkmannProblem::new(&mesh, &scenario.params).expect("example factorization");

    criterion(1, "degenerate consistency", &mut results, degenerate);
    criterion(2, "adjoint identity", &mut results, || adjoint(&problem, &scenario));
    criterion(3, "manufactured-solution convergence", &mut results, manufactured);
    criterion(4, "first-order rate of the perturbed solution", &mut results, || lemma(&problem));
    criterion(5, "small-obstacle expansion", &mut results, || expansion(&problem, &scenario));

    let start = Instant::now();
    let example = run_one_shot(&scenario);
    let seconds = start.elapsed().as_secs_f64();
    criterion(6, "centered disc reconstruction", &mut results, || {
        match &example {
            Ok(report) => centered_disc(report, seconds),
            Err(e) => Ok(outcome(false, format!("error: {e}"))),
        }
    });
    criterion(7, "size-sweep trend", &mut results, || size_trend(&scenario));
    criterion(8, "noise robustness", &mut results, || noise(&scenario));
    criterion(9, "determinism", &mut results, determinism);
    criterion(10, "oracle agreement", &mut results, || {
        match &example {
            Ok(report) => oracle(&mesh, report, &scenario.truth),
            Err(e) => Ok(outcome(false, format!("error: {e}"))),
        }
    });

    let passed = results.iter().filter(|p| **p).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

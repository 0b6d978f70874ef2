mod common;

use common::{mesh, mms_errors};
use topograd::fem::norms::l2_norm_sq_on;
use topograd::fem::{assemble, BrinkmannParams, CoefficientField, SaddleSolver, StiffnessForm, Traction};
use topograd::Point;

#[test]
fn manufactured_solution_converges_at_taylor_hood_rates() {
    let errs: Vec<(f64, f64)> = [8, 16, 32].iter().map(|&n| mms_errors(n, 1.0, 1.0)).collect();
    for w in errs.windows(2) {
        let ru = (w[0].0 / w[1].0).log2();
        let rp = (w[0].1 / w[1].1).log2();
        assert!(ru >= 2.9, "velocity rate {ru} ({errs:?})");
        assert!(rp >= 1.9, "pressure rate {rp} ({errs:?})");
    }
}

#[test]
fn manufactured_solution_with_other_coefficients() {
    let (eu, ep) = mms_errors(16, 0.3, 5.0);
    assert!(eu < 1e-4, "{eu}");
    assert!(ep < 2e-2, "{ep}");
}

#[test]
fn reduced_system_is_symmetric_and_solution_is_divergence_free() {
    let m = mesh(6);
    for form in [StiffnessForm::Gradient, StiffnessForm::SymmetricStrain] {
        let params = BrinkmannParams {
            stiffness_form: form,
            ..BrinkmannParams::default()
        };
        let tris: Vec<usize> = (30..40).collect();
        let dc = CoefficientField::indicator(&m, &tris, 1e4).unwrap();
        let system = assemble(&m, &params, &dc).unwrap();
        assert!(system.velocity_block.relative_asymmetry() < 1e-12);
        let solver = SaddleSolver::factorize(&system).unwrap();
        let (u, p) = solver.solve_raw(&system.rhs_u, &system.rhs_p).unwrap();
        assert!(solver.relative_residual(&u, &p, &system.rhs_u, &system.rhs_p) <= 1e-10);
        let bu = system.divergence.mul_vec(&u);
        let scale = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(scale > 0.0);
        assert!(bu.iter().all(|v| v.abs() <= 1e-10 * scale), "discrete divergence");
        for &d in &system.constrained_dofs {
            assert_eq!(u[d], 0.0);
        }
    }
}

#[test]
fn velocity_block_is_positive_definite_on_free_dofs() {
    let m = mesh(4);
    let system = assemble(&m, &BrinkmannParams::default(), &CoefficientField::zeros(&m)).unwrap();
    let mask = system.constrained_mask();
    let free: Vec<usize> = (0..mask.len()).filter(|&i| !mask[i]).collect();
    let dense = system.velocity_block.to_dense();
    let k = free.len();
    let mut l = vec![vec![0.0; k]; k];
    // Plain Cholesky; a nonpositive pivot means the block is not SPD.
    let mut min_pivot = f64::INFINITY;
    for i in 0..k {
        for j in 0..=i {
            let mut s = dense[free[i]][free[j]];
            for q in 0..j {
                s -= l[i][q] * l[j][q];
            }
            if i == j {
                assert!(s > 0.0, "nonpositive pivot at {i}");
                min_pivot = min_pivot.min(s);
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    assert!(min_pivot > 1e-8);
}

#[test]
fn zero_traction_gives_zero_solution() {
    let m = mesh(5);
    let params = BrinkmannParams::default().with_traction(Traction::Constant(Point::new(0.0, 0.0)));
    let system = assemble(&m, &params, &CoefficientField::zeros(&m)).unwrap();
    let (u, p) = topograd::fem::solve_saddle(&m, &system).unwrap();
    assert!(u.values().iter().all(|v| *v == 0.0));
    assert!(p.values().iter().all(|v| *v == 0.0));
}

#[test]
fn solution_is_linear_in_traction() {
    let m = mesh(6);
    let base = BrinkmannParams::default();
    let doubled = base.with_traction(Traction::Constant(Point::new(2.0, 0.0)));
    let (u1, _) = topograd::brinkmann::solve_direct(&m, &base).unwrap();
    let (u2, _) = topograd::brinkmann::solve_direct(&m, &doubled).unwrap();
    let scale = u1.max_abs();
    assert!(scale > 1e-3, "default setup must drive a nonzero flow");
    for (a, b) in u1.values().iter().zip(u2.values()) {
        assert!((2.0 * a - b).abs() <= 1e-10 * scale);
    }
}

#[test]
fn zero_coefficient_equals_unperturbed_operator() {
    let m = mesh(5);
    let params = BrinkmannParams::default();
    let a = assemble(&m, &params, &CoefficientField::zeros(&m)).unwrap();
    let b = assemble(&m, &params, &CoefficientField::indicator(&m, &[], 1e6).unwrap()).unwrap();
    assert_eq!(a.velocity_block, b.velocity_block);
    assert_eq!(a.rhs_u, b.rhs_u);
}

#[test]
fn penalization_suppresses_velocity_monotonically() {
    let m = mesh(20);
    let shape = topograd::brinkmann::ObstacleShape::disc(Point::new(0.5, 0.5), 0.12);
    let tris = topograd::brinkmann::obstacle_triangles(&m, &shape);
    let inside = |t: usize| tris.binary_search(&t).is_ok();
    let mut last = f64::INFINITY;
    for k in [1.0, 1e2, 1e4, 1e6] {
        let params = BrinkmannParams::default().with_k_penalty(k);
        let (u, _) = topograd::brinkmann::solve_with_obstacle(&m, &params, &shape).unwrap();
        let energy = l2_norm_sq_on(&m, &u, inside).unwrap();
        assert!(energy < last, "k = {k}: {energy} !< {last}");
        last = energy;
    }
    assert!(last < 1e-6);
}

//! Direct solution of the reduced saddle-point system.
//!
//! The reduced matrix is
//! ```text
//! [ A_r  B_rᵀ ]
//! [ B_r   0   ]
//! ```
//! where rows and columns of Γ dofs are replaced by the identity. It is
//! symmetric, so its CSR arrays double as the CSC arrays handed to the LU.

use faer::prelude::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::Col;

use super::assembly::SaddleSystem;
use super::fields::{PressureField, VelocityField};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Relative residual accepted after refinement.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// LU factorization of a reduced saddle matrix.
pub struct SaddleSolver {
    matrix: CsrMatrix,
    lu: Lu<usize, f64>,
    symbolic: SymbolicLu<usize>,
    n_u: usize,
    constrained: Vec<bool>,
}

impl SaddleSolver {
    pub fn factorize(system: &SaddleSystem) -> Result<Self> {
        Self::factorize_with(system, None)
    }

    /// Factorizes, reusing a symbolic analysis from a system with the same
    /// sparsity pattern (same mesh) when one is given.
    pub fn factorize_with(system: &SaddleSystem, symbolic: Option<&SymbolicLu<usize>>) -> Result<Self> {
        let n_u = system.num_velocity_dofs();
        let n_p = system.num_pressure_dofs();
        if system.divergence.ncols() != n_u || system.rhs_u.len() != n_u || system.rhs_p.len() != n_p {
            return Err(Error::DimensionMismatch("inconsistent saddle-point blocks".into()));
        }
        let constrained = system.constrained_mask();
        let matrix = reduced_matrix(system, &constrained);
        let n = n_u + n_p;
        let sym_ref = SymbolicSparseColMatRef::new_checked(n, n, matrix.row_ptr(), None, matrix.col_idx());
        let mat_ref = SparseColMatRef::new(sym_ref, matrix.values());
        let symbolic = match symbolic {
            Some(s) => s.clone(),
            None => SymbolicLu::try_new(sym_ref)
                .map_err(|e| Error::SingularSystem(format!("symbolic analysis failed: {e:?}")))?,
        };
        let lu = Lu::try_new_with_symbolic(symbolic.clone(), mat_ref)
            .map_err(|e| Error::SingularSystem(format!("LU factorization failed: {e:?}")))?;
        Ok(Self {
            matrix,
            lu,
            symbolic,
            n_u,
            constrained,
        })
    }

    pub fn symbolic(&self) -> &SymbolicLu<usize> {
        &self.symbolic
    }

    /// Solves with the given loads; loads on Γ dofs are ignored (the
    /// condition there is homogeneous).
    pub fn solve_raw(&self, rhs_u: &[f64], rhs_p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.matrix.nrows();
        if rhs_u.len() != self.n_u || rhs_u.len() + rhs_p.len() != n {
            return Err(Error::DimensionMismatch("right-hand side does not match the factorization".into()));
        }
        let b: Vec<f64> = rhs_u
            .iter()
            .enumerate()
            .map(|(i, v)| if self.constrained[i] { 0.0 } else { *v })
            .chain(rhs_p.iter().copied())
            .collect();
        let b_norm = norm(&b);
        if b_norm == 0.0 {
            return Ok((vec![0.0; self.n_u], vec![0.0; rhs_p.len()]));
        }
        let mut x = self.apply_inverse(&b);
        let mut rel = norm(&self.residual(&x, &b)) / b_norm;
        for _ in 0..3 {
            if rel <= 1e-13 {
                break;
            }
            let r = self.residual(&x, &b);
            let dx = self.apply_inverse(&r);
            x.iter_mut().zip(dx).for_each(|(xi, d)| *xi += d);
            rel = norm(&self.residual(&x, &b)) / b_norm;
        }
        if !rel.is_finite() || rel > RESIDUAL_TOLERANCE {
            return Err(Error::SingularSystem(format!(
                "relative residual {rel:e} after refinement exceeds {RESIDUAL_TOLERANCE:e}"
            )));
        }
        let p = x.split_off(self.n_u);
        Ok((x, p))
    }

    pub fn solve(&self, mesh: &Mesh, rhs_u: &[f64], rhs_p: &[f64]) -> Result<(VelocityField, PressureField)> {
        let (u, p) = self.solve_raw(rhs_u, rhs_p)?;
        Ok((VelocityField::from_values(mesh, u)?, PressureField::from_values(mesh, p)?))
    }

    /// Relative residual `‖K x − b‖ / ‖b‖` of the reduced system for a
    /// candidate solution.
    pub fn relative_residual(&self, u: &[f64], p: &[f64], rhs_u: &[f64], rhs_p: &[f64]) -> f64 {
        let x: Vec<f64> = u.iter().chain(p).copied().collect();
        let b: Vec<f64> = rhs_u
            .iter()
            .enumerate()
            .map(|(i, v)| if self.constrained[i] { 0.0 } else { *v })
            .chain(rhs_p.iter().copied())
            .collect();
        let bn = norm(&b);
        let r = norm(&self.residual(&x, &b));
        if bn == 0.0 {
            r
        } else {
            r / bn
        }
    }

    fn apply_inverse(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Col::<f64>::from_fn(b.len(), |i| b[i]);
        let sol = self.lu.solve(&rhs);
        (0..b.len()).map(|i| sol[i]).collect()
    }

    fn residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(x).iter().zip(b).map(|(kx, bi)| bi - kx).collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn reduced_matrix(system: &SaddleSystem, constrained: &[bool]) -> CsrMatrix {
    let n_u = system.num_velocity_dofs();
    let n_p = system.num_pressure_dofs();
    let bt = system.divergence.transpose();
    let a = &system.velocity_block;
    let mut triplets = Vec::with_capacity(a.nnz() + 2 * system.divergence.nnz() + n_u);
    for i in 0..n_u {
        for (j, v) in a.row(i) {
            let value = if constrained[i] || constrained[j] {
                if i == j && constrained[i] {
                    1.0
                } else {
                    0.0
                }
            } else {
                v
            };
            triplets.push((i, j, value));
        }
        for (q, v) in bt.row(i) {
            let value = if constrained[i] { 0.0 } else { v };
            triplets.push((i, n_u + q, value));
            triplets.push((n_u + q, i, value));
        }
    }
    CsrMatrix::from_triplets(n_u + n_p, n_u + n_p, triplets)
}

/// Factorizes and solves `system` with its own right-hand side.
pub fn solve_saddle(mesh: &Mesh, system: &SaddleSystem) -> Result<(VelocityField, PressureField)> {
    let solver = SaddleSolver::factorize(system)?;
    solver.solve(mesh, &system.rhs_u, &system.rhs_p)
}

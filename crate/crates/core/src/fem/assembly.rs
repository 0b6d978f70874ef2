//! Global assembly of the Taylor-Hood saddle-point system.
//!
//! Global unknowns: velocity dof `2*node + c` for every P2 node, followed by
//! one pressure dof per vertex.

use super::basis::{p2_edge_values, p2_values, TriangleGeometry};
use super::element::{element_matrices, p2_mass_with};
use super::fields::VelocityField;
use super::params::{BrinkmannParams, CoefficientField};
use super::quadrature::{edge_gauss3, TriangleRule};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::{BoundaryTag, Mesh};

/// Right-hand side volume force.
#[derive(Clone, Copy)]
pub enum BodyForce<'a> {
    /// Analytic force, integrated with a high-order rule.
    Function(&'a (dyn Fn(Point) -> Point + Sync)),
    /// Force given as a P2 field, integrated exactly through the mass matrix.
    Nodal(&'a VelocityField),
}

/// The assembled (unreduced) operator blocks plus the data needed to impose
/// the no-slip condition on Γ.
#[derive(Clone, Debug)]
pub struct SaddleSystem {
    /// `A = ν·(viscous form) + (α + δc)·(vector mass)` before boundary reduction.
    pub velocity_block: CsrMatrix,
    /// `B[q][j] = −∫ λ_q div φ_j` before boundary reduction.
    pub divergence: CsrMatrix,
    pub rhs_u: Vec<f64>,
    pub rhs_p: Vec<f64>,
    /// Sorted velocity dofs carrying the homogeneous Dirichlet condition.
    pub constrained_dofs: Vec<usize>,
}

impl SaddleSystem {
    pub fn num_velocity_dofs(&self) -> usize {
        self.velocity_block.nrows()
    }

    pub fn num_pressure_dofs(&self) -> usize {
        self.divergence.nrows()
    }

    pub fn constrained_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.num_velocity_dofs()];
        for &d in &self.constrained_dofs {
            mask[d] = true;
        }
        mask
    }

    /// Adds `∫ f·v` to the velocity load.
    pub fn add_body_force(&mut self, mesh: &Mesh, force: BodyForce<'_>) -> Result<()> {
        if self.num_velocity_dofs() != 2 * mesh.num_nodes() {
            return Err(Error::DimensionMismatch("system and mesh disagree".into()));
        }
        let load = body_force_load(mesh, force)?;
        for (r, l) in self.rhs_u.iter_mut().zip(load) {
            *r += l;
        }
        Ok(())
    }

    /// Replaces the right-hand side by `∫ f·v` (no traction, no pressure load).
    pub fn with_body_force_only(&self, mesh: &Mesh, force: BodyForce<'_>) -> Result<Self> {
        let mut out = self.clone();
        out.rhs_u.iter_mut().for_each(|v| *v = 0.0);
        out.rhs_p.iter_mut().for_each(|v| *v = 0.0);
        out.add_body_force(mesh, force)?;
        Ok(out)
    }
}

/// Load vector `∫ f·φ` for every velocity dof.
pub fn body_force_load(mesh: &Mesh, force: BodyForce<'_>) -> Result<Vec<f64>> {
    let mut load = vec![0.0; 2 * mesh.num_nodes()];
    match force {
        BodyForce::Function(f) => {
            let rule = TriangleRule::collapsed_gauss(5);
            for (t, tri) in mesh.triangles().iter().enumerate() {
                let geo = TriangleGeometry::new(mesh.triangle_vertices(t))?;
                for (l, w) in rule.points.iter().zip(&rule.weights) {
                    let fx = f(geo.point(*l));
                    let phi = p2_values(*l);
                    for (i, &node) in tri.iter().enumerate() {
                        let s = w * geo.area * phi[i];
                        load[2 * node] += s * fx.x;
                        load[2 * node + 1] += s * fx.y;
                    }
                }
            }
        }
        BodyForce::Nodal(field) => {
            if !field.matches(mesh) {
                return Err(Error::DimensionMismatch("body force field does not belong to this mesh".into()));
            }
            for (t, tri) in mesh.triangles().iter().enumerate() {
                let geo = TriangleGeometry::new(mesh.triangle_vertices(t))?;
                let m = p2_mass_with(&geo);
                for (i, &ni) in tri.iter().enumerate() {
                    for (j, &nj) in tri.iter().enumerate() {
                        let fj = field.at_node(nj);
                        load[2 * ni] += m[i][j] * fj.x;
                        load[2 * ni + 1] += m[i][j] * fj.y;
                    }
                }
            }
        }
    }
    Ok(load)
}

/// Assembles the Brinkmann operator with extra reaction `dc` and the
/// traction load on Σ.
pub fn assemble(mesh: &Mesh, params: &BrinkmannParams, dc: &CoefficientField) -> Result<SaddleSystem> {
    params.validate()?;
    if dc.values().len() != mesh.num_triangles() {
        return Err(Error::DimensionMismatch(format!(
            "coefficient field has {} values, mesh has {} triangles",
            dc.values().len(),
            mesh.num_triangles()
        )));
    }
    let n_u = 2 * mesh.num_nodes();
    let n_p = mesh.num_vertices();

    let mut a_triplets = Vec::with_capacity(144 * mesh.num_triangles());
    let mut b_triplets = Vec::with_capacity(36 * mesh.num_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let reaction = params.alpha + dc.values()[t];
        let e = element_matrices(mesh.triangle_vertices(t), params.nu, reaction, params.stiffness_form)?;
        let dof = |k: usize| 2 * tri[k / 2] + k % 2;
        for i in 0..12 {
            for j in 0..12 {
                // The full 12×12 pattern is always emitted so every
                // coefficient field produces the same sparsity.
                a_triplets.push((dof(i), dof(j), e.stiffness[i][j] + e.mass[i][j]));
            }
        }
        for q in 0..3 {
            for j in 0..12 {
                b_triplets.push((tri[q], dof(j), e.divergence[q][j]));
            }
        }
    }
    let velocity_block = CsrMatrix::from_triplets(n_u, n_u, a_triplets);
    let divergence = CsrMatrix::from_triplets(n_p, n_u, b_triplets);

    let mut rhs_u = vec![0.0; n_u];
    let (tq, tw) = edge_gauss3();
    for be in mesh.boundary_edges() {
        if be.tag != BoundaryTag::Sigma {
            continue;
        }
        let [a, b, _] = be.nodes;
        let (pa, pb) = (mesh.nodes()[a], mesh.nodes()[b]);
        let length = pa.distance(pb);
        for (t, w) in tq.iter().zip(&tw) {
            let x = pa + *t * (pb - pa);
            let g = params.traction.at(be.side, x);
            let phi = p2_edge_values(*t);
            for (k, &node) in be.nodes.iter().enumerate() {
                rhs_u[2 * node] += w * length * phi[k] * g.x;
                rhs_u[2 * node + 1] += w * length * phi[k] * g.y;
            }
        }
    }

    let constrained_dofs: Vec<usize> = (0..mesh.num_nodes())
        .filter(|&k| mesh.boundary_tag(k) == Some(BoundaryTag::Gamma))
        .flat_map(|k| [2 * k, 2 * k + 1])
        .collect();
    if constrained_dofs.is_empty() {
        return Err(Error::SingularSystem("no no-slip (Γ) nodes: boundary tags are missing".into()));
    }

    Ok(SaddleSystem {
        velocity_block,
        divergence,
        rhs_u,
        rhs_p: vec![0.0; n_p],
        constrained_dofs,
    })
}

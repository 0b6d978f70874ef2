use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::TopoGradientField;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Sub-level set `{G ≤ (1−γ) min G}` on the mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetRegion {
    pub gamma: f64,
    /// `(1−γ) min G`, or `None` when `G` has no negative value.
    pub threshold: Option<f64>,
    /// Member vertices, ascending.
    pub vertices: Vec<usize>,
    /// Triangles with all three vertices in the set, ascending.
    pub triangles: Vec<usize>,
    pub area: f64,
    pub perimeter: f64,
}

impl LevelSetRegion {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn contains_triangle(&self, t: usize) -> bool {
        self.triangles.binary_search(&t).is_ok()
    }

    /// Per-vertex membership mask.
    pub fn vertex_mask(&self, mesh: &Mesh) -> Vec<bool> {
        let mut mask = vec![false; mesh.num_vertices()];
        for &v in &self.vertices {
            mask[v] = true;
        }
        mask
    }
}

/// Thresholds `G` at `(1−γ) min G`.
///
/// When `min G ≥ 0` there is no descent direction and the region is empty
/// with no threshold.
pub fn level_set_region(mesh: &Mesh, g: &TopoGradientField, gamma: f64) -> Result<LevelSetRegion> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::param("gamma", format!("must lie in [0, 1], got {gamma}")));
    }
    if g.values().len() != mesh.num_vertices() {
        return Err(Error::DimensionMismatch("gradient does not belong to this mesh".into()));
    }
    if !g.has_descent() {
        return Ok(LevelSetRegion {
            gamma,
            threshold: None,
            vertices: Vec::new(),
            triangles: Vec::new(),
            area: 0.0,
            perimeter: 0.0,
        });
    }
    let threshold = (1.0 - gamma) * g.min_value();
    let mask: Vec<bool> = g.values().iter().map(|v| *v <= threshold).collect();
    let vertices: Vec<usize> = (0..mask.len()).filter(|&v| mask[v]).collect();
    let triangles: Vec<usize> = mesh
        .triangles()
        .iter()
        .enumerate()
        .filter(|(_, tri)| tri[..3].iter().all(|&v| mask[v]))
        .map(|(t, _)| t)
        .collect();
    Ok(LevelSetRegion {
        gamma,
        threshold: Some(threshold),
        area: mesh.area_of(&triangles),
        perimeter: marching_squares_perimeter(mesh, &mask)?,
        vertices,
        triangles,
    })
}

/// Length of the marching-squares contour of a binary vertex field, with
/// crossings at edge midpoints.
///
/// Only the interface inside the square counts; the outer boundary does not.
/// Both resolutions of a saddle cell give the same length.
pub fn marching_squares_perimeter(mesh: &Mesh, inside: &[bool]) -> Result<f64> {
    if inside.len() != mesh.num_vertices() {
        return Err(Error::DimensionMismatch("vertex mask does not belong to this mesh".into()));
    }
    let n = mesh.n();
    let h = mesh.h();
    let mut length = 0.0;
    for j in 0..n {
        for i in 0..n {
            let c = [
                inside[mesh.vertex_index(i, j)],
                inside[mesh.vertex_index(i + 1, j)],
                inside[mesh.vertex_index(i + 1, j + 1)],
                inside[mesh.vertex_index(i, j + 1)],
            ];
            // Cell edges in cyclic order: bottom, right, top, left.
            let cut = [c[0] != c[1], c[1] != c[2], c[2] != c[3], c[3] != c[0]];
            length += match cut.iter().filter(|x| **x).count() {
                0 => 0.0,
                // Opposite edges cut: a straight segment across the cell.
                2 if cut[0] == cut[2] => h,
                2 => h / SQRT_2,
                4 => SQRT_2 * h,
                _ => unreachable!("a closed cycle crosses an even number of times"),
            };
        }
    }
    Ok(length)
}

use crate::brinkmann::ObstacleShape;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

use super::LevelSetRegion;

/// Sub-triangles per edge used to integrate the truth indicator.
pub const TRUTH_SUBDIVISIONS: usize = 8;

/// Fraction of every triangle covered by `truth`, by the centroid rule on the
/// uniform `m × m` refinement of the triangle.
pub fn truth_fractions(mesh: &Mesh, truth: &ObstacleShape) -> Result<Vec<f64>> {
    truth.validate()?;
    let m = TRUTH_SUBDIVISIONS;
    let c = truth.center().unwrap_or_default();
    let (ex, ey) = truth.half_extent();
    let mut samples = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m - i {
            samples.push(((i as f64 + 1.0 / 3.0) / m as f64, (j as f64 + 1.0 / 3.0) / m as f64));
            if i + j + 1 < m {
                samples.push(((i as f64 + 2.0 / 3.0) / m as f64, (j as f64 + 2.0 / 3.0) / m as f64));
            }
        }
    }
    debug_assert_eq!(samples.len(), m * m);
    let mut out = vec![0.0; mesh.num_triangles()];
    for (t, f) in out.iter_mut().enumerate() {
        let [a, b, d] = mesh.triangle_vertices(t);
        let (lo_x, hi_x) = (a.x.min(b.x).min(d.x), a.x.max(b.x).max(d.x));
        let (lo_y, hi_y) = (a.y.min(b.y).min(d.y), a.y.max(b.y).max(d.y));
        if hi_x < c.x - ex || lo_x > c.x + ex || hi_y < c.y - ey || lo_y > c.y + ey {
            continue;
        }
        let hits = samples
            .iter()
            .filter(|(s, r)| truth.contains(a + *s * (b - a) + *r * (d - a)))
            .count();
        *f = hits as f64 / samples.len() as f64;
    }
    Ok(out)
}

pub(crate) fn error_e_with(mesh: &Mesh, triangles: &[usize], fractions: &[f64]) -> Result<f64> {
    let truth: f64 = (0..mesh.num_triangles()).map(|t| fractions[t] * mesh.triangle_area(t)).sum();
    if truth <= 0.0 {
        return Err(Error::InvalidShape("true obstacle has zero measure on this mesh".into()));
    }
    let (mut area, mut overlap) = (0.0, 0.0);
    for &t in triangles {
        let a = mesh.triangle_area(t);
        area += a;
        overlap += fractions[t] * a;
    }
    // meas(ω ∪ ω_γ) − meas(ω ∩ ω_γ), with the union written out.
    Ok(((truth + area - 2.0 * overlap) / truth).max(0.0))
}

/// Symmetric-difference error `[meas(ω ∪ ω_γ) − meas(ω ∩ ω_γ)] / meas(ω)`.
pub fn error_e(mesh: &Mesh, region: &LevelSetRegion, truth: &ObstacleShape) -> Result<f64> {
    if truth.is_none() {
        return Err(Error::InvalidShape("error score needs a true obstacle".into()));
    }
    error_e_with(mesh, &region.triangles, &truth_fractions(mesh, truth)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brinkmann::obstacle_triangles;
    use crate::geometry::Point;
    use crate::mesh::BoundaryPartition;

    fn region(mesh: &Mesh, triangles: Vec<usize>) -> LevelSetRegion {
        LevelSetRegion {
            gamma: 0.5,
            threshold: Some(-1.0),
            vertices: Vec::new(),
            area: mesh.area_of(&triangles),
            perimeter: 0.0,
            triangles,
        }
    }

    #[test]
    fn truth_area_is_accurate() {
        let mesh = Mesh::unit_square(50, BoundaryPartition::default()).unwrap();
        let disc = ObstacleShape::disc(Point::new(0.43, 0.57), 0.13);
        let f = truth_fractions(&mesh, &disc).unwrap();
        let area: f64 = f.iter().enumerate().map(|(t, v)| v * mesh.triangle_area(t)).sum();
        assert!((area / disc.area() - 1.0).abs() < 2e-3, "{area}");
    }

    #[test]
    fn disjoint_and_matching_regions() {
        let mesh = Mesh::unit_square(40, BoundaryPartition::default()).unwrap();
        let disc = ObstacleShape::disc(Point::new(0.3, 0.3), 0.1);
        let f = truth_fractions(&mesh, &disc).unwrap();
        let truth: f64 = f.iter().enumerate().map(|(t, v)| v * mesh.triangle_area(t)).sum();
        // The same disc moved far away: no overlap, E = 1 + area/meas(ω).
        let far = region(&mesh, obstacle_triangles(&mesh, &ObstacleShape::disc(Point::new(0.7, 0.7), 0.1)));
        let e = error_e(&mesh, &far, &disc).unwrap();
        assert!((e - (1.0 + far.area / truth)).abs() < 1e-12);
        assert!((e - 2.0).abs() < 0.05);
        // Empty reconstruction: E = 1.
        assert!((error_e(&mesh, &region(&mesh, vec![]), &disc).unwrap() - 1.0).abs() < 1e-12);
        // Discretized truth: only boundary triangles contribute.
        let own = region(&mesh, obstacle_triangles(&mesh, &disc));
        assert!(error_e(&mesh, &own, &disc).unwrap() < 0.15);
        assert!(error_e(&mesh, &own, &ObstacleShape::None).is_err());
    }

    #[test]
    fn fully_covered_triangles_score_partial_measure() {
        // Fully covered triangles as the reconstruction: the error is the
        // partially covered measure relative to the truth.
        let mesh = Mesh::unit_square(10, BoundaryPartition::default()).unwrap();
        let disc = ObstacleShape::disc(Point::new(0.5, 0.5), 0.35);
        let f = truth_fractions(&mesh, &disc).unwrap();
        let full: Vec<usize> = (0..mesh.num_triangles()).filter(|&t| f[t] == 1.0).collect();
        let partial: f64 = (0..mesh.num_triangles())
            .filter(|&t| f[t] > 0.0 && f[t] < 1.0)
            .map(|t| f[t] * mesh.triangle_area(t))
            .sum();
        let e = error_e(&mesh, &region(&mesh, full.clone()), &disc).unwrap();
        let truth = mesh.area_of(&full) + partial;
        assert!((e - partial / truth).abs() < 1e-12);
    }
}

//! Lagrange shape functions in barycentric form.

use crate::error::{Error, Result};
use crate::geometry::{twice_signed_area, Point};

/// Affine data of a triangle: area and the constant gradients of its
/// barycentric coordinates.
#[derive(Clone, Copy, Debug)]
pub struct TriangleGeometry {
    pub vertices: [Point; 3],
    pub area: f64,
    pub grad_lambda: [Point; 3],
}

impl TriangleGeometry {
    pub fn new(vertices: [Point; 3]) -> Result<Self> {
        let [a, b, c] = vertices;
        let det = twice_signed_area(a, b, c);
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::DegenerateTriangle(0.5 * det));
        }
        let grad_lambda = [
            Point::new((b.y - c.y) / det, (c.x - b.x) / det),
            Point::new((c.y - a.y) / det, (a.x - c.x) / det),
            Point::new((a.y - b.y) / det, (b.x - a.x) / det),
        ];
        Ok(Self {
            vertices,
            area: 0.5 * det,
            grad_lambda,
        })
    }

    /// Physical point with the given barycentric coordinates.
    pub fn point(&self, lambda: [f64; 3]) -> Point {
        let [a, b, c] = self.vertices;
        Point::new(
            lambda[0] * a.x + lambda[1] * b.x + lambda[2] * c.x,
            lambda[0] * a.y + lambda[1] * b.y + lambda[2] * c.y,
        )
    }
}

/// Midpoint slots: P2 node `3 + k` sits on the edge between vertices
/// `EDGE_VERTICES[k]`.
pub const EDGE_VERTICES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

pub fn p1_values(lambda: [f64; 3]) -> [f64; 3] {
    lambda
}

pub fn p2_values(l: [f64; 3]) -> [f64; 6] {
    [
        l[0] * (2.0 * l[0] - 1.0),
        l[1] * (2.0 * l[1] - 1.0),
        l[2] * (2.0 * l[2] - 1.0),
        4.0 * l[0] * l[1],
        4.0 * l[1] * l[2],
        4.0 * l[2] * l[0],
    ]
}

pub fn p2_gradients(l: [f64; 3], g: &[Point; 3]) -> [Point; 6] {
    let mut out = [Point::default(); 6];
    for k in 0..3 {
        out[k] = (4.0 * l[k] - 1.0) * g[k];
    }
    for (m, &(a, b)) in EDGE_VERTICES.iter().enumerate() {
        out[3 + m] = 4.0 * (l[b] * g[a] + l[a] * g[b]);
    }
    out
}

/// Quadratic Lagrange basis on a segment parameterised by `t ∈ [0, 1]`:
/// `[start, end, midpoint]`.
pub fn p2_edge_values(t: f64) -> [f64; 3] {
    [(1.0 - t) * (1.0 - 2.0 * t), t * (2.0 * t - 1.0), 4.0 * t * (1.0 - t)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p2_basis_is_nodal() {
        let nodes = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.5, 0.5, 0.0],
            [0.0, 0.5, 0.5],
            [0.5, 0.0, 0.5],
        ];
        for (i, l) in nodes.iter().enumerate() {
            let v = p2_values(*l);
            for (j, vj) in v.iter().enumerate() {
                assert_eq!(*vj, if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let geo = TriangleGeometry::new([Point::new(0.1, 0.2), Point::new(0.9, 0.3), Point::new(0.4, 0.8)]).unwrap();
        let l = [0.2, 0.5, 0.3];
        let grads = p2_gradients(l, &geo.grad_lambda);
        let x = geo.point(l);
        let h = 1e-6;
        // barycentric coordinates of a physical point
        let bary = |p: Point| {
            let [a, b, c] = geo.vertices;
            let d = twice_signed_area(a, b, c);
            let l1 = twice_signed_area(a, p, c) / d;
            let l2 = twice_signed_area(a, b, p) / d;
            [1.0 - l1 - l2, l1, l2]
        };
        for k in 0..6 {
            let fx = (p2_values(bary(x + Point::new(h, 0.0)))[k] - p2_values(bary(x - Point::new(h, 0.0)))[k]) / (2.0 * h);
            let fy = (p2_values(bary(x + Point::new(0.0, h)))[k] - p2_values(bary(x - Point::new(0.0, h)))[k]) / (2.0 * h);
            assert!((fx - grads[k].x).abs() < 1e-7);
            assert!((fy - grads[k].y).abs() < 1e-7);
        }
    }

    #[test]
    fn degenerate_triangle_rejected() {
        let r = TriangleGeometry::new([Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(2.0, 2.0)]);
        assert!(matches!(r, Err(Error::DegenerateTriangle(_))));
        let r = TriangleGeometry::new([Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 0.0)]);
        assert!(r.is_err());
    }
}

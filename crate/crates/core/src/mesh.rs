//! Structured triangulation of the unit square with Taylor-Hood node sets.
//!
//! Node numbering:
//! - nodes `0..(n+1)²` are the mesh vertices (the P1 pressure nodes), row
//!   major: vertex `(i, j)` sits at `(i/n, j/n)` with index `j*(n+1) + i`;
//! - the remaining nodes are edge midpoints, one per edge, in the order
//!   horizontal edges, vertical edges, diagonal edges.
//!
//! Every cell `[i/n, (i+1)/n] × [j/n, (j+1)/n]` is split along its
//! lower-left to upper-right diagonal into a lower-right and an upper-left
//! triangle. Local triangle nodes are `[v0, v1, v2, m01, m12, m20]` with the
//! vertices counter-clockwise.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{twice_signed_area, Point};

/// One side of the unit square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Left, Side::Right, Side::Bottom, Side::Top];

    /// Outward unit normal.
    pub fn normal(self) -> Point {
        match self {
            Side::Left => Point::new(-1.0, 0.0),
            Side::Right => Point::new(1.0, 0.0),
            Side::Bottom => Point::new(0.0, -1.0),
            Side::Top => Point::new(0.0, 1.0),
        }
    }

    /// Whether `p` lies on this side (exact comparison, mesh coordinates are
    /// exact on the boundary).
    pub fn contains(self, p: Point) -> bool {
        match self {
            Side::Left => p.x == 0.0,
            Side::Right => p.x == 1.0,
            Side::Bottom => p.y == 0.0,
            Side::Top => p.y == 1.0,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Side::Left => "left",
            Side::Right => "right",
            Side::Bottom => "bottom",
            Side::Top => "top",
        };
        f.write_str(s)
    }
}

/// Boundary condition class of a boundary node or edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    /// Traction (natural) condition.
    Sigma,
    /// No-slip (essential) condition.
    Gamma,
}

/// Split of the four sides into traction sides Σ and no-slip sides Γ.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BoundaryPartition {
    sigma: Vec<Side>,
}

impl BoundaryPartition {
    /// Builds a partition from its traction sides; every other side is Γ.
    /// Both Σ and Γ must be nonempty.
    pub fn new(sigma: &[Side]) -> Result<Self> {
        let mut sigma = sigma.to_vec();
        sigma.sort();
        sigma.dedup();
        if sigma.is_empty() {
            return Err(Error::param("sigma", "at least one traction side is required"));
        }
        if sigma.len() == 4 {
            return Err(Error::param("sigma", "at least one side must carry the no-slip condition"));
        }
        Ok(Self { sigma })
    }

    pub fn sigma_sides(&self) -> &[Side] {
        &self.sigma
    }

    pub fn gamma_sides(&self) -> Vec<Side> {
        Side::ALL
            .into_iter()
            .filter(|s| !self.sigma.contains(s))
            .collect()
    }

    pub fn tag(&self, side: Side) -> BoundaryTag {
        if self.sigma.contains(&side) {
            BoundaryTag::Sigma
        } else {
            BoundaryTag::Gamma
        }
    }
}

impl Default for BoundaryPartition {
    /// Inflow and outflow traction on the left and right sides, walls on top
    /// and bottom.
    fn default() -> Self {
        Self {
            sigma: vec![Side::Left, Side::Right],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub midpoint: usize,
}

/// A mesh edge lying on the boundary of the square.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub side: Side,
    pub tag: BoundaryTag,
    /// `[start vertex, end vertex, midpoint]`.
    pub nodes: [usize; 3],
}

/// Result of [`Mesh::locate_point`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Location {
    pub triangle: usize,
    /// Barycentric coordinates with respect to the triangle's three vertices.
    pub barycentric: [f64; 3],
}

/// Uniform triangulation of `(0,1)²` with P2 and P1 node sets.
///
/// Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    n: usize,
    partition: BoundaryPartition,
    nodes: Vec<Point>,
    edges: Vec<Edge>,
    triangles: Vec<[usize; 6]>,
    boundary_tags: Vec<Option<BoundaryTag>>,
    boundary_edges: Vec<BoundaryEdge>,
}

impl Mesh {
    /// Builds the `n × n` cell mesh, `h = 1/n`.
    pub fn unit_square(n: usize, partition: BoundaryPartition) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidMesh(format!("n must be at least 2, got {n}")));
        }
        let nv = (n + 1) * (n + 1);
        let n_horizontal = n * (n + 1);
        let n_vertical = n * (n + 1);
        let n_edges = n_horizontal + n_vertical + n * n;
        let h = 1.0 / n as f64;
        let coord = |k: usize| if k == n { 1.0 } else { k as f64 * h };

        let vid = |i: usize, j: usize| j * (n + 1) + i;
        let horizontal = |i: usize, j: usize| j * n + i;
        let vertical = |i: usize, j: usize| n_horizontal + j * (n + 1) + i;
        let diagonal = |i: usize, j: usize| n_horizontal + n_vertical + j * n + i;

        let mut nodes = Vec::with_capacity(nv + n_edges);
        for j in 0..=n {
            for i in 0..=n {
                nodes.push(Point::new(coord(i), coord(j)));
            }
        }

        let mut edges = vec![
            Edge {
                vertices: [0, 0],
                midpoint: 0
            };
            n_edges
        ];
        for j in 0..=n {
            for i in 0..n {
                edges[horizontal(i, j)].vertices = [vid(i, j), vid(i + 1, j)];
            }
        }
        for j in 0..n {
            for i in 0..=n {
                edges[vertical(i, j)].vertices = [vid(i, j), vid(i, j + 1)];
            }
        }
        for j in 0..n {
            for i in 0..n {
                edges[diagonal(i, j)].vertices = [vid(i, j), vid(i + 1, j + 1)];
            }
        }
        for (e, edge) in edges.iter_mut().enumerate() {
            edge.midpoint = nv + e;
            let [a, b] = edge.vertices;
            nodes.push(nodes[a].midpoint(nodes[b]));
        }

        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v01, v11) = (vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1));
                triangles.push([
                    v00,
                    v10,
                    v11,
                    nv + horizontal(i, j),
                    nv + vertical(i + 1, j),
                    nv + diagonal(i, j),
                ]);
                triangles.push([
                    v00,
                    v11,
                    v01,
                    nv + diagonal(i, j),
                    nv + horizontal(i, j + 1),
                    nv + vertical(i, j),
                ]);
            }
        }

        let mut boundary_edges = Vec::with_capacity(4 * n);
        for side in Side::ALL {
            let tag = partition.tag(side);
            for k in 0..n {
                let e = match side {
                    Side::Bottom => horizontal(k, 0),
                    Side::Top => horizontal(k, n),
                    Side::Left => vertical(0, k),
                    Side::Right => vertical(n, k),
                };
                let [a, b] = edges[e].vertices;
                boundary_edges.push(BoundaryEdge {
                    side,
                    tag,
                    nodes: [a, b, edges[e].midpoint],
                });
            }
        }

        // Nodes shared by a Σ side and a Γ side (the corners) end up Γ.
        let mut boundary_tags = vec![None; nodes.len()];
        for be in &boundary_edges {
            for &node in &be.nodes {
                let slot = &mut boundary_tags[node];
                *slot = match (*slot, be.tag) {
                    (Some(BoundaryTag::Gamma), _) | (_, BoundaryTag::Gamma) => Some(BoundaryTag::Gamma),
                    _ => Some(BoundaryTag::Sigma),
                };
            }
        }

        Ok(Self {
            n,
            partition,
            nodes,
            edges,
            triangles,
            boundary_tags,
            boundary_edges,
        })
    }

    /// Number of cells per side.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn partition(&self) -> &BoundaryPartition {
        &self.partition
    }

    pub fn num_vertices(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    /// Number of P2 nodes (vertices and edge midpoints).
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// All P2 node coordinates; the first [`Mesh::num_vertices`] are the vertices.
    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn vertices(&self) -> &[Point] {
        &self.nodes[..self.num_vertices()]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[usize; 6]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    /// Boundary tag of a P2 node; `None` for interior nodes.
    pub fn boundary_tag(&self, node: usize) -> Option<BoundaryTag> {
        self.boundary_tags[node]
    }

    pub fn vertex_index(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }

    /// Grid position `(i, j)` of a vertex.
    pub fn vertex_grid_position(&self, v: usize) -> (usize, usize) {
        (v % (self.n + 1), v / (self.n + 1))
    }

    pub fn triangle_vertices(&self, t: usize) -> [Point; 3] {
        let tri = &self.triangles[t];
        [self.nodes[tri[0]], self.nodes[tri[1]], self.nodes[tri[2]]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_vertices(t);
        0.5 * twice_signed_area(a, b, c)
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangle_vertices(t);
        Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    }

    /// Finds a triangle containing `x` and the barycentric coordinates of `x`
    /// in it. Points on shared edges resolve to a single triangle
    /// deterministically.
    pub fn locate_point(&self, x: Point) -> Result<Location> {
        if !(0.0..=1.0).contains(&x.x) || !(0.0..=1.0).contains(&x.y) {
            return Err(Error::OutsideDomain { x: x.x, y: x.y });
        }
        let n = self.n;
        let nf = n as f64;
        let i = ((x.x * nf).floor() as usize).min(n - 1);
        let j = ((x.y * nf).floor() as usize).min(n - 1);
        let s = (x.x * nf - i as f64).clamp(0.0, 1.0);
        let t = (x.y * nf - j as f64).clamp(0.0, 1.0);
        let cell = j * n + i;
        // Local coordinates in the cell: lower-right triangle (v00, v10, v11)
        // when s >= t, otherwise upper-left (v00, v11, v01).
        let (triangle, barycentric) = if s >= t {
            (2 * cell, [1.0 - s, s - t, t])
        } else {
            (2 * cell + 1, [1.0 - t, s, t - s])
        };
        Ok(Location {
            triangle,
            barycentric,
        })
    }

    /// Total area of a set of triangles.
    pub fn area_of(&self, triangles: &[usize]) -> f64 {
        triangles.iter().map(|&t| self.triangle_area(t)).sum()
    }
}

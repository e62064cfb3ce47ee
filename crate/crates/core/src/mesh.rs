//! Structured triangulations of axis-aligned rectangles.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Real, Result};

/// Side of the rectangle a boundary edge lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub side: Side,
}

/// Conforming triangulation with tagged boundary edges.
///
/// Triangles are stored counter-clockwise. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh<T> {
    vertices: Vec<[T; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    bounds: [T; 4],
}

/// Per-edge incidence summary produced by [`TriMesh::edge_incidence`].
pub type EdgeIncidence = BTreeMap<(usize, usize), usize>;

impl<T: Real> TriMesh<T> {
    /// Builds a structured mesh of `[x0,x1] x [y0,y1]` with `nx * ny` cells,
    /// each split along its bottom-left to top-right diagonal.
    pub fn rectangle(x0: T, x1: T, y0: T, y1: T, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::invalid(format!(
                "cell counts must be positive, got nx={nx}, ny={ny}"
            )));
        }
        if !(x1 > x0 && y1 > y0) {
            return Err(Error::invalid("rectangle must have positive extent"));
        }
        let idx = |i: usize, j: usize| j * (nx + 1) + i;
        let coord = |a: T, b: T, k: usize, n: usize| {
            if k == n {
                b
            } else {
                a + (b - a) * (T::from_count(k) / T::from_count(n))
            }
        };
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([coord(x0, x1, i, nx), coord(y0, y1, j, ny)]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let v00 = idx(i, j);
                let v10 = idx(i + 1, j);
                let v01 = idx(i, j + 1);
                let v11 = idx(i + 1, j + 1);
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        let mut boundary_edges = Vec::with_capacity(2 * (nx + ny));
        for i in 0..nx {
            boundary_edges.push(BoundaryEdge {
                vertices: [idx(i, 0), idx(i + 1, 0)],
                side: Side::Bottom,
            });
        }
        for j in 0..ny {
            boundary_edges.push(BoundaryEdge {
                vertices: [idx(nx, j), idx(nx, j + 1)],
                side: Side::Right,
            });
        }
        for i in (0..nx).rev() {
            boundary_edges.push(BoundaryEdge {
                vertices: [idx(i + 1, ny), idx(i, ny)],
                side: Side::Top,
            });
        }
        for j in (0..ny).rev() {
            boundary_edges.push(BoundaryEdge {
                vertices: [idx(0, j + 1), idx(0, j)],
                side: Side::Left,
            });
        }
        Ok(Self {
            vertices,
            triangles,
            boundary_edges,
            bounds: [x0, x1, y0, y1],
        })
    }

    /// Structured mesh of the unit square `(0,1)^2`.
    pub fn unit_square(nx: usize, ny: usize) -> Result<Self> {
        Self::rectangle(T::zero(), T::one(), T::zero(), T::one(), nx, ny)
    }

    pub fn vertices(&self) -> &[[T; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// `[x0, x1, y0, y1]` of the meshed rectangle.
    pub fn bounds(&self) -> [T; 4] {
        self.bounds
    }

    pub fn domain_area(&self) -> T {
        let [x0, x1, y0, y1] = self.bounds;
        (x1 - x0) * (y1 - y0)
    }

    pub fn triangle_coords(&self, t: usize) -> [[T; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Signed area, positive for counter-clockwise orientation.
    pub fn signed_area(&self, t: usize) -> T {
        let [p0, p1, p2] = self.triangle_coords(t);
        let two = T::lit(2.0);
        ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1])) / two
    }

    pub fn total_area(&self) -> T {
        (0..self.n_triangles()).map(|t| self.signed_area(t)).sum()
    }

    /// Number of triangles incident to each undirected edge.
    pub fn edge_incidence(&self) -> EdgeIncidence {
        let mut edges = BTreeMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        edges
    }

    /// Vertices lying on the boundary of the rectangle.
    pub fn boundary_vertex_set(&self) -> BTreeSet<usize> {
        self.boundary_edges
            .iter()
            .flat_map(|e| e.vertices)
            .collect()
    }

    /// Longest edge length.
    pub fn mesh_size(&self) -> T {
        self.edge_incidence()
            .keys()
            .map(|&(a, b)| {
                let (pa, pb) = (self.vertices[a], self.vertices[b]);
                ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt()
            })
            .fold(T::zero(), T::max)
    }

    /// Index of the vertex closest to `p` (lowest index on ties).
    pub fn nearest_vertex(&self, p: [T; 2]) -> usize {
        let mut best = (T::infinity(), 0);
        for (i, v) in self.vertices.iter().enumerate() {
            let d = (v[0] - p[0]).powi(2) + (v[1] - p[1]).powi(2);
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    /// Checks the structural invariants, returning the first violation.
    pub fn validate(&self) -> Result<()> {
        for t in 0..self.n_triangles() {
            if !(self.signed_area(t) > T::zero()) {
                return Err(Error::invalid(format!("triangle {t} has non-positive area")));
            }
        }
        let rel = ((self.total_area() - self.domain_area()) / self.domain_area()).abs();
        if rel > T::lit(1e-12).max(T::epsilon() * T::lit(64.0)) {
            return Err(Error::invalid("triangle areas do not tile the rectangle"));
        }
        let incidence = self.edge_incidence();
        let boundary: BTreeSet<(usize, usize)> = self
            .boundary_edges
            .iter()
            .map(|e| {
                let [a, b] = e.vertices;
                (a.min(b), a.max(b))
            })
            .collect();
        if boundary.len() != self.boundary_edges.len() {
            return Err(Error::invalid("duplicate boundary edge"));
        }
        for (edge, &count) in &incidence {
            let expected = if boundary.contains(edge) { 1 } else { 2 };
            if count != expected {
                return Err(Error::invalid(format!(
                    "edge {edge:?} shared by {count} triangles, expected {expected}"
                )));
            }
        }
        if boundary.iter().any(|e| !incidence.contains_key(e)) {
            return Err(Error::invalid("boundary edge not in any triangle"));
        }
        let [x0, x1, y0, y1] = self.bounds;
        let mut length = T::zero();
        for e in &self.boundary_edges {
            let [a, b] = e.vertices.map(|v| self.vertices[v]);
            let on_side = |p: [T; 2]| match e.side {
                Side::Left => p[0] == x0,
                Side::Right => p[0] == x1,
                Side::Bottom => p[1] == y0,
                Side::Top => p[1] == y1,
            };
            if !(on_side(a) && on_side(b)) {
                return Err(Error::invalid(format!("boundary edge {:?} off its side", e.vertices)));
            }
            length += ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        }
        let perimeter = T::lit(2.0) * ((x1 - x0) + (y1 - y0));
        if ((length - perimeter) / perimeter).abs() > T::lit(1e-10).max(T::epsilon() * T::lit(64.0)) {
            return Err(Error::invalid("boundary edges do not cover the boundary"));
        }
        Ok(())
    }

    /// Writes the bare mesh as legacy ASCII VTK.
    pub fn write_vtk(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str("# vtk DataFile Version 2.0\nmesh\nASCII\nDATASET UNSTRUCTURED_GRID\n");
        self.write_vtk_geometry(&mut out);
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub(crate) fn write_vtk_geometry(&self, out: &mut String) {
        let _ = writeln!(out, "POINTS {} double", self.n_vertices());
        for v in &self.vertices {
            let _ = writeln!(out, "{:.8e} {:.8e} 0", v[0].as_f64(), v[1].as_f64());
        }
        let nt = self.n_triangles();
        let _ = writeln!(out, "CELLS {} {}", nt, 4 * nt);
        for t in &self.triangles {
            let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
        }
        let _ = writeln!(out, "CELL_TYPES {nt}");
        for _ in 0..nt {
            out.push_str("5\n");
        }
    }
}

/// Structured unit-square mesh; see [`TriMesh::unit_square`].
pub fn build_unit_square_mesh<T: Real>(nx: usize, ny: usize) -> Result<TriMesh<T>> {
    TriMesh::unit_square(nx, ny)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_area() {
        for (n, nv, nt) in [(1, 4, 2), (2, 9, 8), (32, 1089, 2048)] {
            let m = TriMesh::<f64>::unit_square(n, n).unwrap();
            assert_eq!(m.n_vertices(), nv);
            assert_eq!(m.n_triangles(), nt);
            assert!((m.total_area() - 1.0).abs() < 1e-12);
            m.validate().unwrap();
        }
    }

    #[test]
    fn rejects_zero_cells() {
        assert!(matches!(
            TriMesh::<f64>::unit_square(0, 3),
            Err(Error::InvalidArgument(_))
        ));
        assert!(TriMesh::<f64>::unit_square(3, 0).is_err());
    }

    #[test]
    fn boundary_vertices() {
        let m = TriMesh::<f64>::unit_square(1, 1).unwrap();
        assert_eq!(m.boundary_vertex_set().len(), 4);
        let m = TriMesh::<f64>::unit_square(2, 2).unwrap();
        let b = m.boundary_vertex_set();
        assert_eq!(b.len(), 8);
        assert!(!b.contains(&4));
        let m = TriMesh::<f64>::unit_square(4, 4).unwrap();
        assert_eq!(m.boundary_vertex_set().len(), 16);
        let m = TriMesh::<f64>::unit_square(5, 3).unwrap();
        assert_eq!(m.boundary_vertex_set().len(), 2 * (5 + 3));
    }

    #[test]
    fn mesh_size_is_cell_diagonal() {
        let s2 = 2f64.sqrt();
        for (n, h) in [(1, s2), (2, s2 / 2.0), (10, s2 / 10.0)] {
            let m = TriMesh::<f64>::unit_square(n, n).unwrap();
            assert!((m.mesh_size() - h).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_convention_is_bottom_left_to_top_right() {
        let m = TriMesh::<f64>::unit_square(1, 1).unwrap();
        let inc = m.edge_incidence();
        assert_eq!(inc.get(&(0, 3)), Some(&2));
        assert!(!inc.contains_key(&(1, 2)));
    }

    #[test]
    fn single_precision_mesh() {
        let m = TriMesh::<f32>::unit_square(8, 8).unwrap();
        m.validate().unwrap();
        assert!((m.total_area() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn non_square_rectangle() {
        let m = TriMesh::<f64>::rectangle(-1.0, 2.0, 0.5, 1.5, 6, 2).unwrap();
        m.validate().unwrap();
        assert!((m.total_area() - 3.0).abs() < 1e-12);
        assert_eq!(m.n_triangles(), 24);
    }
}

use crate::mesh::TriMesh;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayoutKind {
    P1Scalar,
    /// Two components, each P1 plus one bubble per triangle.
    MiniVelocity,
    P1Pressure,
}

/// Degree-of-freedom numbering for one discrete space.
///
/// P1 spaces number dofs by vertex. The MINI velocity space stores component
/// `c` in the block `c * (nv + nt) ..`, vertex dofs first, then one bubble dof
/// per triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofLayout {
    pub kind: LayoutKind,
    pub n_vertices: usize,
    pub n_triangles: usize,
}

impl DofLayout {
    pub fn new<T: Real>(kind: LayoutKind, mesh: &TriMesh<T>) -> Self {
        Self {
            kind,
            n_vertices: mesh.vertices().len(),
            n_triangles: mesh.triangles().len(),
        }
    }

    pub fn p1<T: Real>(mesh: &TriMesh<T>) -> Self {
        Self::new(LayoutKind::P1Scalar, mesh)
    }

    pub fn mini<T: Real>(mesh: &TriMesh<T>) -> Self {
        Self::new(LayoutKind::MiniVelocity, mesh)
    }

    pub fn pressure<T: Real>(mesh: &TriMesh<T>) -> Self {
        Self::new(LayoutKind::P1Pressure, mesh)
    }

    pub fn dof_count(&self) -> usize {
        match self.kind {
            LayoutKind::P1Scalar | LayoutKind::P1Pressure => self.n_vertices,
            LayoutKind::MiniVelocity => 2 * self.component_size(),
        }
    }

    /// Dofs per velocity component (`nv + nt`); equals `dof_count` for P1.
    pub fn component_size(&self) -> usize {
        match self.kind {
            LayoutKind::MiniVelocity => self.n_vertices + self.n_triangles,
            _ => self.n_vertices,
        }
    }

    pub fn vertex_dof(&self, component: usize, v: usize) -> usize {
        debug_assert!(v < self.n_vertices);
        match self.kind {
            LayoutKind::MiniVelocity => component * self.component_size() + v,
            _ => v,
        }
    }

    /// Bubble dof of triangle `t`; only meaningful for the MINI layout.
    pub fn bubble_dof(&self, component: usize, t: usize) -> usize {
        debug_assert_eq!(self.kind, LayoutKind::MiniVelocity);
        component * self.component_size() + self.n_vertices + t
    }

    /// Local-to-global map of a MINI element: `[c0: v0 v1 v2 b, c1: v0 v1 v2 b]`.
    pub fn velocity_element_dofs(&self, t: usize, tri: [usize; 3]) -> [usize; 8] {
        let mut d = [0; 8];
        for c in 0..2 {
            for k in 0..3 {
                d[4 * c + k] = self.vertex_dof(c, tri[k]);
            }
            d[4 * c + 3] = self.bubble_dof(c, t);
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn counts() {
        let m = TriMesh::<f64>::unit_square(4, 3).unwrap();
        assert_eq!(DofLayout::p1(&m).dof_count(), 20);
        assert_eq!(DofLayout::pressure(&m).dof_count(), 20);
        assert_eq!(DofLayout::mini(&m).dof_count(), 2 * (20 + 24));
    }

    #[test]
    fn mini_dofs_contiguous() {
        let m = TriMesh::<f64>::unit_square(3, 3).unwrap();
        let l = DofLayout::mini(&m);
        let mut seen = BTreeSet::new();
        for (t, tri) in m.triangles().iter().enumerate() {
            seen.extend(l.velocity_element_dofs(t, *tri));
        }
        assert_eq!(seen.len(), l.dof_count());
        assert_eq!(*seen.iter().next_back().unwrap(), l.dof_count() - 1);
    }
}

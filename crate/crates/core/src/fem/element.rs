use crate::mesh::TriMesh;
use crate::Real;

/// Bubble scaling: `27 λ0 λ1 λ2` peaks at 1 on the barycentre.
pub const BUBBLE_SCALE: f64 = 27.0;

/// Affine data of one triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry<T> {
    pub vertices: [usize; 3],
    pub coords: [[T; 2]; 3],
    pub area: T,
    /// Constant gradients of the barycentric coordinates.
    pub grad_lambda: [[T; 2]; 3],
}

impl<T: Real> ElementGeometry<T> {
    pub fn new(mesh: &TriMesh<T>, t: usize) -> Self {
        let coords = mesh.triangle_coords(t);
        let [p0, p1, p2] = coords;
        let two_a = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let inv = T::one() / two_a;
        let grad_lambda = [
            [(p1[1] - p2[1]) * inv, (p2[0] - p1[0]) * inv],
            [(p2[1] - p0[1]) * inv, (p0[0] - p2[0]) * inv],
            [(p0[1] - p1[1]) * inv, (p1[0] - p0[0]) * inv],
        ];
        Self {
            vertices: mesh.triangles()[t],
            coords,
            area: two_a / T::lit(2.0),
            grad_lambda,
        }
    }

    /// Physical point at barycentric coordinates `l`.
    pub fn point(&self, l: &[T; 3]) -> [T; 2] {
        let c = &self.coords;
        [
            l[0] * c[0][0] + l[1] * c[1][0] + l[2] * c[2][0],
            l[0] * c[0][1] + l[1] * c[1][1] + l[2] * c[2][1],
        ]
    }

    /// Longest edge.
    pub fn diameter(&self) -> T {
        let c = &self.coords;
        (0..3)
            .map(|k| {
                let (a, b) = (c[k], c[(k + 1) % 3]);
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
            })
            .fold(T::zero(), T::max)
    }

    /// MINI scalar basis `[λ0, λ1, λ2, bubble]` and its gradients.
    pub fn mini_basis(&self, l: &[T; 3]) -> ([T; 4], [[T; 2]; 4]) {
        let g = &self.grad_lambda;
        let s = T::lit(BUBBLE_SCALE);
        let bubble = s * l[0] * l[1] * l[2];
        let (c0, c1, c2) = (l[1] * l[2], l[0] * l[2], l[0] * l[1]);
        let gb = [
            s * (c0 * g[0][0] + c1 * g[1][0] + c2 * g[2][0]),
            s * (c0 * g[0][1] + c1 * g[1][1] + c2 * g[2][1]),
        ];
        ([l[0], l[1], l[2], bubble], [g[0], g[1], g[2], gb])
    }
}

/// Bubble value at barycentric coordinates.
pub fn bubble<T: Real>(l: &[T; 3]) -> T {
    T::lit(BUBBLE_SCALE) * l[0] * l[1] * l[2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_gradients() {
        let m = TriMesh::<f64>::unit_square(1, 1).unwrap();
        // triangle 0 = (0,0), (1,0), (1,1)
        let g = ElementGeometry::new(&m, 0);
        assert!((g.area - 0.5).abs() < 1e-15);
        let sum: [f64; 2] = [
            g.grad_lambda.iter().map(|v| v[0]).sum(),
            g.grad_lambda.iter().map(|v| v[1]).sum(),
        ];
        assert!(sum[0].abs() < 1e-15 && sum[1].abs() < 1e-15);
        assert_eq!(g.grad_lambda[0], [-1.0, 0.0]);
    }

    #[test]
    fn bubble_vanishes_on_edges_and_peaks_at_centroid() {
        for k in 0..=10 {
            let s = k as f64 / 10.0;
            for l in [[0.0, s, 1.0 - s], [s, 0.0, 1.0 - s], [s, 1.0 - s, 0.0]] {
                assert!(bubble(&l).abs() < 1e-14);
            }
        }
        let c: f64 = 1.0 / 3.0;
        assert!((bubble(&[c, c, c]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn bubble_gradient_matches_finite_difference() {
        let m = TriMesh::<f64>::rectangle(0.0, 2.0, 0.0, 1.0, 1, 1).unwrap();
        let g = ElementGeometry::new(&m, 1);
        let l = [0.2, 0.5, 0.3];
        let p = g.point(&l);
        let bary = |x: f64, y: f64| {
            let mut out = [0.0; 3];
            for k in 0..3 {
                out[k] = l[k] + g.grad_lambda[k][0] * (x - p[0]) + g.grad_lambda[k][1] * (y - p[1]);
            }
            out
        };
        let h = 1e-6;
        let (_, grads) = g.mini_basis(&l);
        let fx = (bubble(&bary(p[0] + h, p[1])) - bubble(&bary(p[0] - h, p[1]))) / (2.0 * h);
        let fy = (bubble(&bary(p[0], p[1] + h)) - bubble(&bary(p[0], p[1] - h))) / (2.0 * h);
        assert!((grads[3][0] - fx).abs() < 1e-8);
        assert!((grads[3][1] - fy).abs() < 1e-8);
    }

    #[test]
    fn partition_of_unity_at_points() {
        let m = TriMesh::<f64>::unit_square(3, 3).unwrap();
        let rule = super::super::QuadratureRule::<f64>::new(super::super::RuleKind::Degree4);
        for t in 0..m.n_triangles() {
            let g = ElementGeometry::new(&m, t);
            for l in &rule.points {
                let (phi, _) = g.mini_basis(l);
                assert!((phi[0] + phi[1] + phi[2] - 1.0).abs() < 1e-14);
            }
        }
    }
}

//! Error norms against pointwise reference functions (degree-5 quadrature).

use super::{p1_value, velocity_eval, velocity_local, DofLayout, ElementGeometry, QuadratureRule, RuleKind};
use crate::mesh::TriMesh;
use crate::Real;

/// `||u_h - exact||_{L2}`.
pub fn l2_error_p1<T: Real>(mesh: &TriMesh<T>, u_h: &[T], exact: impl Fn(T, T) -> T) -> T {
    let rule = QuadratureRule::new(RuleKind::Degree5);
    let mut acc = T::zero();
    for (t, &tri) in mesh.triangles().iter().enumerate() {
        let g = ElementGeometry::new(mesh, t);
        let scale = g.area + g.area;
        for (l, &w) in rule.points.iter().zip(&rule.weights) {
            let p = g.point(l);
            let e = p1_value(u_h, tri, l) - exact(p[0], p[1]);
            acc += w * scale * e * e;
        }
    }
    acc.sqrt()
}

pub fn l2_norm_p1<T: Real>(mesh: &TriMesh<T>, u_h: &[T]) -> T {
    l2_error_p1(mesh, u_h, |_, _| T::zero())
}

/// `||∇(u_h - exact)||_{L2}` given the exact gradient.
pub fn h1_seminorm_error_p1<T: Real>(mesh: &TriMesh<T>, u_h: &[T], grad: impl Fn(T, T) -> [T; 2]) -> T {
    let rule = QuadratureRule::new(RuleKind::Degree5);
    let mut acc = T::zero();
    for (t, &tri) in mesh.triangles().iter().enumerate() {
        let g = ElementGeometry::new(mesh, t);
        let scale = g.area + g.area;
        let gl = &g.grad_lambda;
        let mut gh = [T::zero(); 2];
        for k in 0..3 {
            gh[0] += u_h[tri[k]] * gl[k][0];
            gh[1] += u_h[tri[k]] * gl[k][1];
        }
        for (l, &w) in rule.points.iter().zip(&rule.weights) {
            let p = g.point(l);
            let ge = grad(p[0], p[1]);
            let (dx, dy) = (gh[0] - ge[0], gh[1] - ge[1]);
            acc += w * scale * (dx * dx + dy * dy);
        }
    }
    acc.sqrt()
}

/// L2 and H1-seminorm of a MINI velocity error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityNorms<T> {
    pub l2: T,
    pub h1: T,
}

/// Errors of a MINI velocity against `exact` and its Jacobian
/// (`jac[d][c] = ∂_c U_d`). Pass zero functions to get the norms of `u_h`.
pub fn velocity_errors<T: Real>(
    mesh: &TriMesh<T>,
    u_h: &[T],
    exact: impl Fn(T, T) -> [T; 2],
    jac: impl Fn(T, T) -> [[T; 2]; 2],
) -> VelocityNorms<T> {
    let layout = DofLayout::mini(mesh);
    let rule = QuadratureRule::new(RuleKind::Degree5);
    let (mut l2, mut h1) = (T::zero(), T::zero());
    for (t, &tri) in mesh.triangles().iter().enumerate() {
        let g = ElementGeometry::new(mesh, t);
        let scale = g.area + g.area;
        let u = velocity_local(u_h, &layout, t, tri);
        for (l, &w) in rule.points.iter().zip(&rule.weights) {
            let (phi, dphi) = g.mini_basis(l);
            let (val, grad) = velocity_eval(&phi, &dphi, &u);
            let p = g.point(l);
            let (ue, je) = (exact(p[0], p[1]), jac(p[0], p[1]));
            let wq = w * scale;
            for d in 0..2 {
                let e = val[d] - ue[d];
                l2 += wq * e * e;
                for c in 0..2 {
                    let e = grad[d][c] - je[d][c];
                    h1 += wq * e * e;
                }
            }
        }
    }
    VelocityNorms {
        l2: l2.sqrt(),
        h1: h1.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{interpolate, interpolate_velocity};

    #[test]
    fn linear_fields_have_zero_error() {
        let m = TriMesh::<f64>::unit_square(3, 5).unwrap();
        let u = interpolate(&m, &DofLayout::p1(&m), |x, y| 2.0 * x - y + 0.5).unwrap();
        assert!(l2_error_p1(&m, &u, |x, y| 2.0 * x - y + 0.5) < 1e-14);
        assert!(h1_seminorm_error_p1(&m, &u, |_, _| [2.0, -1.0]) < 1e-13);
        let v = interpolate_velocity(&m, |x, y| [y, 3.0 * x]).unwrap();
        let e = velocity_errors(&m, &v, |x, y| [y, 3.0 * x], |_, _| [[0.0, 1.0], [3.0, 0.0]]);
        assert!(e.l2 < 1e-14 && e.h1 < 1e-13);
    }

    #[test]
    fn unit_constant_norm_is_one() {
        let m = TriMesh::<f64>::unit_square(4, 4).unwrap();
        assert!((l2_norm_p1(&m, &vec![1.0; m.n_vertices()]) - 1.0).abs() < 1e-14);
    }
}

use super::{DofLayout, LayoutKind};
use crate::mesh::TriMesh;
use crate::{Error, Real, Result};

fn non_finite<T: Real>(p: [T; 2]) -> Error {
    Error::NonFiniteAt {
        x: p[0].as_f64(),
        y: p[1].as_f64(),
        what: "interpolated expression".into(),
    }
}

/// Nodal interpolant of a scalar expression on a P1 layout.
pub fn interpolate<T: Real>(
    mesh: &TriMesh<T>,
    layout: &DofLayout,
    expr: impl Fn(T, T) -> T,
) -> Result<Vec<T>> {
    if layout.kind == LayoutKind::MiniVelocity {
        return Err(Error::invalid("use interpolate_velocity for the MINI layout"));
    }
    mesh.vertices()
        .iter()
        .map(|&p| {
            let v = expr(p[0], p[1]);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(non_finite(p))
            }
        })
        .collect()
}

/// Vertex interpolant of a vector expression on the MINI layout; bubble
/// coefficients are zero.
pub fn interpolate_velocity<T: Real>(mesh: &TriMesh<T>, expr: impl Fn(T, T) -> [T; 2]) -> Result<Vec<T>> {
    let layout = DofLayout::mini(mesh);
    let mut u = vec![T::zero(); layout.dof_count()];
    for (v, &p) in mesh.vertices().iter().enumerate() {
        let val = expr(p[0], p[1]);
        if !(val[0].is_finite() && val[1].is_finite()) {
            return Err(non_finite(p));
        }
        u[layout.vertex_dof(0, v)] = val[0];
        u[layout.vertex_dof(1, v)] = val[1];
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_and_coordinates() {
        let m = TriMesh::<f64>::unit_square(4, 4).unwrap();
        let p1 = DofLayout::p1(&m);
        assert!(interpolate(&m, &p1, |_, _| 1.0).unwrap().iter().all(|&v| v == 1.0));
        let x = interpolate(&m, &p1, |x, _| x).unwrap();
        let v = m.nearest_vertex([0.25, 0.75]);
        assert_eq!(x[v], 0.25);
    }

    #[test]
    fn velocity_bubbles_are_zero() {
        let m = TriMesh::<f64>::unit_square(3, 3).unwrap();
        let mini = DofLayout::mini(&m);
        let u = interpolate_velocity(&m, |x, y| [x, -y]).unwrap();
        for t in 0..m.n_triangles() {
            assert_eq!(u[mini.bubble_dof(0, t)], 0.0);
            assert_eq!(u[mini.bubble_dof(1, t)], 0.0);
        }
        let v = m.nearest_vertex([1.0, 1.0]);
        assert_eq!(u[mini.vertex_dof(1, v)], -1.0);
    }

    #[test]
    fn non_finite_reports_location() {
        let m = TriMesh::<f64>::unit_square(2, 2).unwrap();
        let p1 = DofLayout::p1(&m);
        let err = interpolate(&m, &p1, |x, y| if x == 0.5 && y == 0.5 { f64::NAN } else { 0.0 }).unwrap_err();
        match err {
            Error::NonFiniteAt { x, y, .. } => assert_eq!((x, y), (0.5, 0.5)),
            other => panic!("{other:?}"),
        }
        assert!(interpolate(&m, &DofLayout::mini(&m), |_, _| 0.0).is_err());
    }
}

//! Element kernels and global assembly of the P1 / MINI operators.

use super::{DofLayout, ElementGeometry, QuadratureRule, RuleKind};
use crate::mesh::TriMesh;
use crate::sparse::{csr_from_triplets, CsrMatrix};
use crate::{Error, Real, Result};

/// Values of a scalar field at the quadrature points of every triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadField<T> {
    pub rule: RuleKind,
    pub n_points: usize,
    /// `values[t * n_points + q]`
    pub values: Vec<T>,
}

impl<T: Real> QuadField<T> {
    pub fn constant(n_triangles: usize, rule: RuleKind, value: T) -> Self {
        let n_points = QuadratureRule::<T>::new(rule).len();
        Self {
            rule,
            n_points,
            values: vec![value; n_triangles * n_points],
        }
    }

    /// Evaluates `f(triangle, barycentric point, physical point)`.
    pub fn from_fn(
        mesh: &TriMesh<T>,
        rule: RuleKind,
        mut f: impl FnMut(usize, &[T; 3], [T; 2]) -> T,
    ) -> Self {
        let r = QuadratureRule::<T>::new(rule);
        let mut values = Vec::with_capacity(mesh.n_triangles() * r.len());
        for t in 0..mesh.n_triangles() {
            let g = ElementGeometry::new(mesh, t);
            for l in &r.points {
                values.push(f(t, l, g.point(l)));
            }
        }
        Self {
            rule,
            n_points: r.len(),
            values,
        }
    }

    /// Composes a pointwise map with the P1 interpolant of `field`.
    pub fn from_p1(mesh: &TriMesh<T>, rule: RuleKind, field: &[T], map: impl Fn(T) -> T) -> Self {
        let tris = mesh.triangles();
        Self::from_fn(mesh, rule, |t, l, _| map(p1_value(field, tris[t], l)))
    }

    #[inline]
    pub fn at(&self, t: usize, q: usize) -> T {
        self.values[t * self.n_points + q]
    }

    /// First element index holding a non-finite value.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.values
            .iter()
            .position(|v| !v.is_finite())
            .map(|i| i / self.n_points.max(1))
    }
}

/// Scalar coefficient for the stiffness operator.
#[derive(Debug, Clone, Copy)]
pub enum Coefficient<'a, T> {
    Constant(T),
    PerElement(&'a [T]),
    PerQuadPoint(&'a QuadField<T>),
}

impl<'a, T: Real> Coefficient<'a, T> {
    fn rule(&self) -> RuleKind {
        match self {
            Coefficient::PerQuadPoint(f) => f.rule,
            _ => RuleKind::Degree2,
        }
    }

    #[inline]
    fn at(&self, t: usize, q: usize) -> T {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::PerElement(v) => v[t],
            Coefficient::PerQuadPoint(f) => f.at(t, q),
        }
    }

    fn check(&self, n_triangles: usize) -> Result<()> {
        let bad = |v: &T| v.is_nan() || *v < T::zero();
        match self {
            Coefficient::Constant(c) if bad(c) => {
                Err(Error::invalid(format!("negative coefficient {c}")))
            }
            Coefficient::PerElement(v) => {
                if v.len() != n_triangles {
                    return Err(Error::invalid("per-element coefficient length mismatch"));
                }
                match v.iter().position(bad) {
                    Some(t) => Err(Error::invalid(format!("negative coefficient in element {t}"))),
                    None => Ok(()),
                }
            }
            Coefficient::PerQuadPoint(f) => {
                if f.values.len() != n_triangles * f.n_points {
                    return Err(Error::invalid("quadrature coefficient length mismatch"));
                }
                match f.values.iter().position(bad) {
                    Some(i) => Err(Error::invalid(format!(
                        "negative coefficient in element {}",
                        i / f.n_points
                    ))),
                    None => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }
}

#[inline]
pub(crate) fn p1_value<T: Real>(field: &[T], tri: [usize; 3], l: &[T; 3]) -> T {
    l[0] * field[tri[0]] + l[1] * field[tri[1]] + l[2] * field[tri[2]]
}

/// Local MINI coefficients `[component][v0 v1 v2 bubble]` of triangle `t`.
#[inline]
pub(crate) fn velocity_local<T: Real>(u: &[T], layout: &DofLayout, t: usize, tri: [usize; 3]) -> [[T; 4]; 2] {
    let d = layout.velocity_element_dofs(t, tri);
    [
        [u[d[0]], u[d[1]], u[d[2]], u[d[3]]],
        [u[d[4]], u[d[5]], u[d[6]], u[d[7]]],
    ]
}

/// Value and gradient (`grad[d][c] = ∂_c U_d`) of a MINI field.
#[inline]
pub(crate) fn velocity_eval<T: Real>(phi: &[T; 4], dphi: &[[T; 2]; 4], u: &[[T; 4]; 2]) -> ([T; 2], [[T; 2]; 2]) {
    let mut val = [T::zero(); 2];
    let mut grad = [[T::zero(); 2]; 2];
    for d in 0..2 {
        for j in 0..4 {
            val[d] += u[d][j] * phi[j];
            grad[d][0] += u[d][j] * dphi[j][0];
            grad[d][1] += u[d][j] * dphi[j][1];
        }
    }
    (val, grad)
}

pub(crate) fn mass_local<T: Real>(g: &ElementGeometry<T>, rule: &QuadratureRule<T>) -> [[T; 3]; 3] {
    weighted_mass_local(g, rule, |_| T::one())
}

pub(crate) fn weighted_mass_local<T: Real>(
    g: &ElementGeometry<T>,
    rule: &QuadratureRule<T>,
    weight: impl Fn(usize) -> T,
) -> [[T; 3]; 3] {
    let mut m = [[T::zero(); 3]; 3];
    let scale = g.area + g.area;
    for (q, (l, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
        let f = w * scale * weight(q);
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += f * l[i] * l[j];
            }
        }
    }
    m
}

pub(crate) fn stiffness_local<T: Real>(
    g: &ElementGeometry<T>,
    rule: &QuadratureRule<T>,
    coeff: impl Fn(usize) -> T,
) -> [[T; 3]; 3] {
    let scale = g.area + g.area;
    let c: T = rule
        .weights
        .iter()
        .enumerate()
        .map(|(q, &w)| w * scale * coeff(q))
        .sum();
    let gl = &g.grad_lambda;
    let mut k = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = c * (gl[i][0] * gl[j][0] + gl[i][1] * gl[j][1]);
        }
    }
    k
}

/// Local MINI velocity operator
/// `mass_coeff (ξ_j, ξ_i) + (ν ∇ξ_j, ∇ξ_i) + ((ξ_j·∇) U_lag, ξ_i)`.
///
/// Local ordering `[c0: v0 v1 v2 b, c1: v0 v1 v2 b]`; row = test, column = trial.
pub(crate) fn velocity_block_local<T: Real>(
    g: &ElementGeometry<T>,
    rule: &QuadratureRule<T>,
    mass_coeff: T,
    nu: impl Fn(usize) -> T,
    lag: Option<&[[T; 4]; 2]>,
) -> [[T; 8]; 8] {
    let mut a = [[T::zero(); 8]; 8];
    let scale = g.area + g.area;
    for (q, (l, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
        let wq = w * scale;
        let (phi, dphi) = g.mini_basis(l);
        let nq = nu(q) * wq;
        let mq = mass_coeff * wq;
        let mut scalar = [[T::zero(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                scalar[i][j] =
                    mq * phi[i] * phi[j] + nq * (dphi[i][0] * dphi[j][0] + dphi[i][1] * dphi[j][1]);
            }
        }
        for d in 0..2 {
            for i in 0..4 {
                for j in 0..4 {
                    a[4 * d + i][4 * d + j] += scalar[i][j];
                }
            }
        }
        if let Some(u) = lag {
            let (_, grad) = velocity_eval(&phi, &dphi, u);
            // test component d, trial component c: φ_j ∂_c U_d φ_i
            for d in 0..2 {
                for c in 0..2 {
                    let gdc = grad[d][c] * wq;
                    for i in 0..4 {
                        for j in 0..4 {
                            a[4 * d + i][4 * c + j] += gdc * phi[i] * phi[j];
                        }
                    }
                }
            }
        }
    }
    a
}

/// Local divergence coupling `∫ λ_p ∂_c ξ_j`, rows = pressure vertex.
pub(crate) fn divergence_local<T: Real>(g: &ElementGeometry<T>, rule: &QuadratureRule<T>) -> [[T; 8]; 3] {
    let mut b = [[T::zero(); 8]; 3];
    let scale = g.area + g.area;
    for (l, &w) in rule.points.iter().zip(&rule.weights) {
        let wq = w * scale;
        let (_, dphi) = g.mini_basis(l);
        for p in 0..3 {
            for c in 0..2 {
                for j in 0..4 {
                    b[p][4 * c + j] += wq * l[p] * dphi[j][c];
                }
            }
        }
    }
    b
}

/// Local load `∫ (U · ∇C) λ_i` for a P1 field `C`.
pub(crate) fn convection_load_local<T: Real>(
    g: &ElementGeometry<T>,
    rule: &QuadratureRule<T>,
    u: &[[T; 4]; 2],
    c: &[T; 3],
) -> [T; 3] {
    let gl = &g.grad_lambda;
    let grad_c = [
        c[0] * gl[0][0] + c[1] * gl[1][0] + c[2] * gl[2][0],
        c[0] * gl[0][1] + c[1] * gl[1][1] + c[2] * gl[2][1],
    ];
    let scale = g.area + g.area;
    let mut b = [T::zero(); 3];
    for (l, &w) in rule.points.iter().zip(&rule.weights) {
        let (phi, dphi) = g.mini_basis(l);
        let (val, _) = velocity_eval(&phi, &dphi, u);
        let adv = (val[0] * grad_c[0] + val[1] * grad_c[1]) * w * scale;
        for i in 0..3 {
            b[i] += adv * l[i];
        }
    }
    b
}

fn scatter3<T: Real>(trip: &mut Vec<(usize, usize, T)>, tri: [usize; 3], local: &[[T; 3]; 3]) {
    for i in 0..3 {
        for j in 0..3 {
            trip.push((tri[i], tri[j], local[i][j]));
        }
    }
}

/// P1 mass matrix `M_ij = ∫ φ_i φ_j` (exact 3-point quadrature).
pub fn assemble_mass_p1<T: Real>(mesh: &TriMesh<T>) -> CsrMatrix<T> {
    let rule = QuadratureRule::new(RuleKind::Degree2);
    let mut trip = Vec::with_capacity(9 * mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let g = ElementGeometry::new(mesh, t);
        scatter3(&mut trip, g.vertices, &mass_local(&g, &rule));
    }
    let n = mesh.n_vertices();
    csr_from_triplets(&trip, (n, n)).expect("mesh indices in range")
}

/// P1 stiffness `K_ij = ∫ coeff ∇φ_i · ∇φ_j`.
pub fn assemble_stiffness_p1<T: Real>(mesh: &TriMesh<T>, coeff: Coefficient<'_, T>) -> Result<CsrMatrix<T>> {
    coeff.check(mesh.n_triangles())?;
    let rule = QuadratureRule::new(coeff.rule());
    let mut trip = Vec::with_capacity(9 * mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let g = ElementGeometry::new(mesh, t);
        scatter3(&mut trip, g.vertices, &stiffness_local(&g, &rule, |q| coeff.at(t, q)));
    }
    let n = mesh.n_vertices();
    csr_from_triplets(&trip, (n, n))
}

/// Weighted mass `W_ij = ∫ w φ_i φ_j` with `w` given at quadrature points.
pub fn assemble_weighted_mass<T: Real>(mesh: &TriMesh<T>, weight: &QuadField<T>) -> Result<CsrMatrix<T>> {
    if weight.values.len() != mesh.n_triangles() * weight.n_points {
        return Err(Error::invalid("weight field does not match mesh"));
    }
    if let Some(element) = weight.first_non_finite() {
        return Err(Error::NonFiniteElement {
            element,
            what: "reaction weight".into(),
        });
    }
    let rule = QuadratureRule::new(weight.rule);
    let mut trip = Vec::with_capacity(9 * mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let g = ElementGeometry::new(mesh, t);
        scatter3(&mut trip, g.vertices, &weighted_mass_local(&g, &rule, |q| weight.at(t, q)));
    }
    let n = mesh.n_vertices();
    csr_from_triplets(&trip, (n, n))
}

/// Weighted mass for a P1 weight field, evaluated with the degree-4 rule.
pub fn assemble_reaction_weighted_mass<T: Real>(mesh: &TriMesh<T>, weight: &[T]) -> Result<CsrMatrix<T>> {
    if weight.len() != mesh.n_vertices() {
        return Err(Error::invalid("weight must be a P1 field"));
    }
    assemble_weighted_mass(mesh, &QuadField::from_p1(mesh, RuleKind::Degree4, weight, |w| w))
}

/// Load vector `b_i = ∫ (U · ∇C) φ_i` for MINI `velocity` and P1 `gradient_source`.
pub fn assemble_scalar_convection<T: Real>(
    mesh: &TriMesh<T>,
    velocity: &[T],
    gradient_source: &[T],
) -> Result<Vec<T>> {
    let mini = DofLayout::mini(mesh);
    if velocity.len() != mini.dof_count() {
        return Err(Error::invalid(format!(
            "velocity has {} entries, MINI layout needs {}",
            velocity.len(),
            mini.dof_count()
        )));
    }
    if gradient_source.len() != mesh.n_vertices() {
        return Err(Error::invalid("gradient source must be a P1 field"));
    }
    let rule = QuadratureRule::new(RuleKind::Degree4);
    let mut b = vec![T::zero(); mesh.n_vertices()];
    for (t, &tri) in mesh.triangles().iter().enumerate() {
        let g = ElementGeometry::new(mesh, t);
        let u = velocity_local(velocity, &mini, t, tri);
        let c = [gradient_source[tri[0]], gradient_source[tri[1]], gradient_source[tri[2]]];
        let local = convection_load_local(&g, &rule, &u, &c);
        for k in 0..3 {
            b[tri[k]] += local[k];
        }
    }
    Ok(b)
}

fn velocity_block<T: Real>(
    mesh: &TriMesh<T>,
    mass_coeff: T,
    nu: &QuadField<T>,
    lag: Option<&[T]>,
) -> Result<CsrMatrix<T>> {
    let mini = DofLayout::mini(mesh);
    if nu.values.len() != mesh.n_triangles() * nu.n_points {
        return Err(Error::invalid("viscosity field does not match mesh"));
    }
    if let Some(element) = nu.first_non_finite() {
        return Err(Error::NonFiniteElement {
            element,
            what: "viscosity".into(),
        });
    }
    if let Some(u) = lag {
        if u.len() != mini.dof_count() {
            return Err(Error::invalid("lagged velocity is not on the MINI layout"));
        }
    }
    let rule = QuadratureRule::new(nu.rule);
    let mut trip = Vec::with_capacity(64 * mesh.n_triangles());
    for (t, &tri) in mesh.triangles().iter().enumerate() {
        let g = ElementGeometry::new(mesh, t);
        let lag_local = lag.map(|u| velocity_local(u, &mini, t, tri));
        let local = velocity_block_local(&g, &rule, mass_coeff, |q| nu.at(t, q), lag_local.as_ref());
        let dofs = mini.velocity_element_dofs(t, tri);
        for i in 0..8 {
            for j in 0..8 {
                trip.push((dofs[i], dofs[j], local[i][j]));
            }
        }
    }
    let n = mini.dof_count();
    csr_from_triplets(&trip, (n, n))
}

/// MINI momentum block `(1/dt) M + K(ν) + N(U_lag)` with
/// `N_ij = ∫ (ξ_j · ∇) U_lag · ξ_i`.
pub fn assemble_mini_momentum_block<T: Real>(
    mesh: &TriMesh<T>,
    nu: &QuadField<T>,
    advecting_lag: Option<&[T]>,
    dt: T,
) -> Result<CsrMatrix<T>> {
    if !(dt > T::zero()) {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    velocity_block(mesh, T::one() / dt, nu, advecting_lag)
}

/// Steady MINI operator `K(ν) + N(U_lag)` (no mass term).
pub fn assemble_mini_viscous_block<T: Real>(
    mesh: &TriMesh<T>,
    nu: &QuadField<T>,
    advecting_lag: Option<&[T]>,
) -> Result<CsrMatrix<T>> {
    velocity_block(mesh, T::zero(), nu, advecting_lag)
}

/// MINI velocity mass matrix (degree-4 quadrature).
pub fn assemble_mini_mass<T: Real>(mesh: &TriMesh<T>) -> CsrMatrix<T> {
    let zero = QuadField::constant(mesh.n_triangles(), RuleKind::Degree4, T::zero());
    velocity_block(mesh, T::one(), &zero, None).expect("valid zero viscosity")
}

/// Divergence operator `B_{q,u} = ∫ q (∇ · ξ_u)`, P1 pressure rows by MINI
/// velocity columns.
pub fn assemble_divergence_block<T: Real>(mesh: &TriMesh<T>) -> CsrMatrix<T> {
    let mini = DofLayout::mini(mesh);
    let rule = QuadratureRule::new(RuleKind::Degree4);
    let mut trip = Vec::with_capacity(24 * mesh.n_triangles());
    for (t, &tri) in mesh.triangles().iter().enumerate() {
        let g = ElementGeometry::new(mesh, t);
        let local = divergence_local(&g, &rule);
        let dofs = mini.velocity_element_dofs(t, tri);
        for p in 0..3 {
            for j in 0..8 {
                trip.push((tri[p], dofs[j], local[p][j]));
            }
        }
    }
    csr_from_triplets(&trip, (mesh.n_vertices(), mini.dof_count())).expect("indices in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SparseLu;

    fn single_triangle() -> TriMesh<f64> {
        // lower triangle of the unit cell is (0,0),(1,0),(1,1); map to the
        // reference triangle by checking entries through its own geometry
        TriMesh::unit_square(1, 1).unwrap()
    }

    #[test]
    fn reference_local_mass_and_stiffness() {
        let m = single_triangle();
        let g = ElementGeometry::new(&m, 1); // (0,0), (1,1), (0,1): right angle at (0,1)
        let rule = QuadratureRule::new(RuleKind::Degree2);
        let mass = mass_local(&g, &rule);
        for i in 0..3 {
            for j in 0..3 {
                let exact = if i == j { 2.0 } else { 1.0 } / 24.0;
                assert!((mass[i][j] - exact).abs() < 1e-15);
            }
        }
        // right angle at local vertex 2 → permuted reference stiffness
        let k = stiffness_local(&g, &rule, |_| 1.0);
        let expect = [[0.5, 0.0, -0.5], [0.0, 0.5, -0.5], [-0.5, -0.5, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - expect[i][j]).abs() < 1e-15, "{i}{j}");
            }
        }
    }

    #[test]
    fn mass_partition_of_unity() {
        for n in [1, 3, 8] {
            let m = TriMesh::<f64>::unit_square(n, n).unwrap();
            let mass = assemble_mass_p1(&m);
            assert!((mass.values().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(mass.asymmetry() < 1e-16);
            // row sum = one third of the incident area
            let mut incident = vec![0.0; m.n_vertices()];
            for t in 0..m.n_triangles() {
                for &v in &m.triangles()[t] {
                    incident[v] += m.signed_area(t);
                }
            }
            for (r, a) in mass.row_sums().iter().zip(&incident) {
                assert!((r - a / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn stiffness_kernel_contains_constants() {
        let m = TriMesh::<f64>::unit_square(8, 8).unwrap();
        let k = assemble_stiffness_p1(&m, Coefficient::Constant(1.0)).unwrap();
        let ones = vec![1.0; m.n_vertices()];
        assert!(k.matvec(&ones).iter().all(|v| v.abs() < 1e-13));
        assert!(k.asymmetry() < 1e-15);
    }

    #[test]
    fn negative_stiffness_coefficient_rejected() {
        let m = TriMesh::<f64>::unit_square(2, 2).unwrap();
        assert!(matches!(
            assemble_stiffness_p1(&m, Coefficient::Constant(-1.0)),
            Err(Error::InvalidArgument(_))
        ));
        let per = vec![1.0; 7];
        assert!(assemble_stiffness_p1(&m, Coefficient::PerElement(&per)).is_err());
        let mut per = vec![1.0; 8];
        per[3] = -0.1;
        assert!(assemble_stiffness_p1(&m, Coefficient::PerElement(&per)).is_err());
    }

    #[test]
    fn weighted_mass_identities() {
        let m = TriMesh::<f64>::unit_square(2, 2).unwrap();
        let n = m.n_vertices();
        let zero = assemble_reaction_weighted_mass(&m, &vec![0.0; n]).unwrap();
        assert!(zero.values().iter().all(|&v| v == 0.0));
        let one = assemble_reaction_weighted_mass(&m, &vec![1.0; n]).unwrap();
        let mass = assemble_mass_p1(&m);
        let two = assemble_reaction_weighted_mass(&m, &vec![2.0; n]).unwrap();
        for i in 0..n {
            for j in 0..n {
                assert!((one.get(i, j) - mass.get(i, j)).abs() < 1e-13);
                assert!((two.get(i, j) - 2.0 * mass.get(i, j)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn weighted_mass_non_finite_reports_element() {
        let m = TriMesh::<f64>::unit_square(2, 2).unwrap();
        let mut w = QuadField::constant(m.n_triangles(), RuleKind::Degree4, 1.0);
        w.values[5 * 6 + 2] = f64::NAN;
        match assemble_weighted_mass(&m, &w) {
            Err(Error::NonFiniteElement { element, .. }) => assert_eq!(element, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn convection_load_cases() {
        let m = TriMesh::<f64>::unit_square(4, 4).unwrap();
        let mini = DofLayout::mini(&m);
        let x: Vec<f64> = m.vertices().iter().map(|v| v[0]).collect();
        let zero_u = vec![0.0; mini.dof_count()];
        assert!(assemble_scalar_convection(&m, &zero_u, &x)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
        let mut unit_x = vec![0.0; mini.dof_count()];
        for v in 0..m.n_vertices() {
            unit_x[mini.vertex_dof(0, v)] = 1.0;
        }
        let constant = vec![3.0; m.n_vertices()];
        assert!(assemble_scalar_convection(&m, &unit_x, &constant)
            .unwrap()
            .iter()
            .all(|v| v.abs() < 1e-15));
        let b = assemble_scalar_convection(&m, &unit_x, &x).unwrap();
        let rows = assemble_mass_p1(&m).row_sums();
        for (p, q) in b.iter().zip(&rows) {
            assert!((p - q).abs() < 1e-15);
        }
        assert!(assemble_scalar_convection(&m, &x, &x).is_err());
        assert!(assemble_scalar_convection(&m, &unit_x, &zero_u).is_err());
    }

    #[test]
    fn momentum_block_without_convection_is_symmetric() {
        let m = TriMesh::<f64>::unit_square(4, 4).unwrap();
        let nu = QuadField::constant(m.n_triangles(), RuleKind::Degree4, 0.1);
        let a = assemble_mini_momentum_block(&m, &nu, None, 0.01).unwrap();
        assert!(a.asymmetry() < 1e-14);
        let zero = vec![0.0; DofLayout::mini(&m).dof_count()];
        let a0 = assemble_mini_momentum_block(&m, &nu, Some(&zero), 0.01).unwrap();
        for (p, q) in a.values().iter().zip(a0.values()) {
            assert!((p - q).abs() < 1e-15);
        }
        assert!(assemble_mini_momentum_block(&m, &nu, None, 0.0).is_err());
        assert!(assemble_mini_momentum_block(&m, &nu, None, -1.0).is_err());
    }

    #[test]
    fn large_dt_limit_is_vector_stiffness() {
        let m = TriMesh::<f64>::unit_square(3, 3).unwrap();
        let nu = QuadField::constant(m.n_triangles(), RuleKind::Degree4, 0.1);
        let a = assemble_mini_momentum_block(&m, &nu, None, 1e300).unwrap();
        let k = assemble_mini_viscous_block(&m, &nu, None).unwrap();
        for (p, q) in a.values().iter().zip(k.values()) {
            assert!((p - q).abs() < 1e-14);
        }
        // vertex part of each component equals the scalar P1 stiffness
        let kp1 = assemble_stiffness_p1(&m, Coefficient::Constant(0.1)).unwrap();
        let mini = DofLayout::mini(&m);
        for i in 0..m.n_vertices() {
            for j in 0..m.n_vertices() {
                for c in 0..2 {
                    let v = k.get(mini.vertex_dof(c, i), mini.vertex_dof(c, j));
                    assert!((v - kp1.get(i, j)).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn constant_lag_adds_no_convection() {
        let m = TriMesh::<f64>::unit_square(3, 3).unwrap();
        let mini = DofLayout::mini(&m);
        let mut u = vec![0.0; mini.dof_count()];
        for v in 0..m.n_vertices() {
            u[mini.vertex_dof(0, v)] = 0.7;
            u[mini.vertex_dof(1, v)] = -0.2;
        }
        let nu = QuadField::constant(m.n_triangles(), RuleKind::Degree4, 0.1);
        let a = assemble_mini_momentum_block(&m, &nu, Some(&u), 0.1).unwrap();
        let b = assemble_mini_momentum_block(&m, &nu, None, 0.1).unwrap();
        for (p, q) in a.values().iter().zip(b.values()) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn divergence_of_zero_and_rigid_translation() {
        let m = TriMesh::<f64>::unit_square(4, 4).unwrap();
        let mini = DofLayout::mini(&m);
        let b = assemble_divergence_block(&m);
        assert_eq!(b.shape(), (m.n_vertices(), mini.dof_count()));
        assert!(b.matvec(&vec![0.0; mini.dof_count()]).iter().all(|&v| v == 0.0));
        let mut u = vec![0.0; mini.dof_count()];
        for v in 0..m.n_vertices() {
            u[mini.vertex_dof(0, v)] = 1.0;
        }
        let bu = b.matvec(&u);
        let boundary = m.boundary_vertex_set();
        for (q, val) in bu.iter().enumerate() {
            if !boundary.contains(&q) {
                assert!(val.abs() < 1e-15, "interior row {q} = {val}");
            }
        }
        // uniform pressure: ∮ U·n vanishes
        assert!(bu.iter().sum::<f64>().abs() < 1e-14);
    }

    #[test]
    fn mass_matrix_is_positive_definite() {
        let m = TriMesh::<f64>::unit_square(5, 5).unwrap();
        let mass = assemble_mass_p1(&m);
        // LDL^T via dense elimination without pivoting: positive pivots ⇔ SPD
        let mut d = mass.to_dense();
        let n = d.len();
        for k in 0..n {
            assert!(d[k][k] > 0.0);
            for i in k + 1..n {
                let f = d[i][k] / d[k][k];
                for j in k..n {
                    d[i][j] -= f * d[k][j];
                }
            }
        }
        let mm = assemble_mini_mass(&m);
        assert!(SparseLu::factor(&mm).is_ok());
    }
}

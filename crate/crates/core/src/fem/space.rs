//! Cached discretisation of one mesh: geometry, fixed sparsity patterns and
//! the constant operators, with slot maps so that the time loop refills
//! matrices in place instead of rebuilding them from triplets.

use std::sync::Arc;

use super::assembly::{
    convection_load_local, divergence_local, mass_local, stiffness_local, velocity_block_local,
    weighted_mass_local,
};
use super::{velocity_eval, velocity_local, DofLayout, ElementGeometry, QuadField, QuadratureRule, RuleKind};
use crate::mesh::TriMesh;
use crate::sparse::ordering::{adjacency, nested_dissection};
use crate::sparse::{CsrMatrix, SparsityPattern};
use crate::{Error, Real, Result};

const ND_LEAF: usize = 16;

/// Saddle-point unknowns are ordered `[U (MINI); p (P1)]`. The system reads
///
/// ```text
/// [  A   -B^T ] [U]   [F]
/// [ -B    0   ] [p] = [0]
/// ```
///
/// with velocity Dirichlet rows and one pressure row replaced by identities.
#[derive(Debug, Clone)]
pub struct Discretization<T> {
    mesh: TriMesh<T>,
    geometry: Vec<ElementGeometry<T>>,
    rule2: QuadratureRule<T>,
    rule4: QuadratureRule<T>,
    p1: DofLayout,
    mini: DofLayout,
    p1_pattern: Arc<SparsityPattern>,
    p1_slots: Vec<[usize; 9]>,
    mass: CsrMatrix<T>,
    stiffness: CsrMatrix<T>,
    mass_rows: Vec<T>,
    boundary: Vec<usize>,
    saddle_pattern: Arc<SparsityPattern>,
    vv_slots: Vec<[usize; 64]>,
    saddle_const: Vec<T>,
    velocity_mass: CsrMatrix<T>,
    divergence: CsrMatrix<T>,
    velocity_boundary: Vec<usize>,
    pinned_pressure: usize,
}

impl<T: Real> Discretization<T> {
    pub fn new(mesh: TriMesh<T>) -> Result<Self> {
        mesh.validate()?;
        let nv = mesh.n_vertices();
        let p1 = DofLayout::p1(&mesh);
        let mini = DofLayout::mini(&mesh);
        let nvel = mini.dof_count();
        let geometry: Vec<_> = (0..mesh.n_triangles()).map(|t| ElementGeometry::new(&mesh, t)).collect();
        let rule2 = QuadratureRule::new(RuleKind::Degree2);
        let rule4 = QuadratureRule::new(RuleKind::Degree4);

        let tris = mesh.triangles();
        let p1_pattern = Arc::new(SparsityPattern::from_entries(
            nv,
            nv,
            tris.iter()
                .flat_map(|tri| (0..9).map(move |k| (tri[k / 3], tri[k % 3]))),
        )?);
        let p1_slots: Vec<[usize; 9]> = tris
            .iter()
            .map(|tri| std::array::from_fn(|k| p1_pattern.slot(tri[k / 3], tri[k % 3]).expect("in pattern")))
            .collect();
        let mut mass = CsrMatrix::zeros(Arc::clone(&p1_pattern));
        let mut stiffness = CsrMatrix::zeros(Arc::clone(&p1_pattern));
        for (t, g) in geometry.iter().enumerate() {
            let m = mass_local(g, &rule2);
            let k = stiffness_local(g, &rule2, |_| T::one());
            for (s, &slot) in p1_slots[t].iter().enumerate() {
                mass.values_mut()[slot] += m[s / 3][s % 3];
                stiffness.values_mut()[slot] += k[s / 3][s % 3];
            }
        }
        let mass_rows = mass.row_sums();
        let boundary: Vec<usize> = mesh.boundary_vertex_set().into_iter().collect();

        // saddle pattern: velocity block, both couplings, pressure diagonal
        let n = nvel + nv;
        let mut entries = Vec::with_capacity(tris.len() * (64 + 48) + nv);
        let mut element_dofs = Vec::with_capacity(tris.len());
        for (t, &tri) in tris.iter().enumerate() {
            let d = mini.velocity_element_dofs(t, tri);
            element_dofs.push(d);
            for &i in &d {
                for &j in &d {
                    entries.push((i, j));
                }
                for &p in &tri {
                    entries.push((i, nvel + p));
                    entries.push((nvel + p, i));
                }
            }
        }
        entries.extend((0..nv).map(|p| (nvel + p, nvel + p)));
        let saddle_pattern = Arc::new(SparsityPattern::from_entries(n, n, entries)?);
        let vv_slots: Vec<[usize; 64]> = element_dofs
            .iter()
            .map(|d| std::array::from_fn(|k| saddle_pattern.slot(d[k / 8], d[k % 8]).expect("in pattern")))
            .collect();

        let mut saddle_const = vec![T::zero(); saddle_pattern.nnz()];
        let mut div_trip = Vec::with_capacity(tris.len() * 24);
        for (t, g) in geometry.iter().enumerate() {
            let b = divergence_local(g, &rule4);
            let tri = tris[t];
            let d = element_dofs[t];
            for p in 0..3 {
                for j in 0..8 {
                    let v = b[p][j];
                    let row = saddle_pattern.slot(nvel + tri[p], d[j]).expect("in pattern");
                    let col = saddle_pattern.slot(d[j], nvel + tri[p]).expect("in pattern");
                    saddle_const[row] -= v;
                    saddle_const[col] -= v;
                    div_trip.push((tri[p], d[j], v));
                }
            }
        }
        let divergence = crate::sparse::csr_from_triplets(&div_trip, (nv, nvel))?;

        let zero = |_| T::zero();
        let mut vm_trip = Vec::with_capacity(tris.len() * 64);
        for (t, g) in geometry.iter().enumerate() {
            let local = velocity_block_local(g, &rule4, T::one(), zero, None);
            let d = element_dofs[t];
            for i in 0..8 {
                for j in 0..8 {
                    vm_trip.push((d[i], d[j], local[i][j]));
                }
            }
        }
        let velocity_mass = crate::sparse::csr_from_triplets(&vm_trip, (nvel, nvel))?;
        let mut velocity_boundary: Vec<usize> = boundary
            .iter()
            .flat_map(|&v| [mini.vertex_dof(0, v), mini.vertex_dof(1, v)])
            .collect();
        velocity_boundary.sort_unstable();

        Ok(Self {
            mesh,
            geometry,
            rule2,
            rule4,
            p1,
            mini,
            p1_pattern,
            p1_slots,
            mass,
            stiffness,
            mass_rows,
            boundary,
            saddle_pattern,
            vv_slots,
            saddle_const,
            velocity_mass,
            divergence,
            velocity_boundary,
            pinned_pressure: 0,
        })
    }

    pub fn mesh(&self) -> &TriMesh<T> {
        &self.mesh
    }

    pub fn geometry(&self) -> &[ElementGeometry<T>] {
        &self.geometry
    }

    pub fn p1_layout(&self) -> DofLayout {
        self.p1
    }

    pub fn mini_layout(&self) -> DofLayout {
        self.mini
    }

    pub fn n_scalar(&self) -> usize {
        self.p1.dof_count()
    }

    pub fn n_velocity(&self) -> usize {
        self.mini.dof_count()
    }

    pub fn n_saddle(&self) -> usize {
        self.n_velocity() + self.n_scalar()
    }

    /// The degree-4 rule used for every variable-coefficient term.
    pub fn rule(&self) -> &QuadratureRule<T> {
        &self.rule4
    }

    /// Consistent P1 mass matrix.
    pub fn mass(&self) -> &CsrMatrix<T> {
        &self.mass
    }

    /// P1 stiffness with unit coefficient.
    pub fn stiffness(&self) -> &CsrMatrix<T> {
        &self.stiffness
    }

    /// `M 1`, i.e. `∫ φ_i`.
    pub fn mass_row_sums(&self) -> &[T] {
        &self.mass_rows
    }

    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary
    }

    pub fn velocity_boundary_dofs(&self) -> &[usize] {
        &self.velocity_boundary
    }

    pub fn velocity_mass(&self) -> &CsrMatrix<T> {
        &self.velocity_mass
    }

    /// `B`, pressure rows by velocity columns.
    pub fn divergence(&self) -> &CsrMatrix<T> {
        &self.divergence
    }

    pub fn pinned_pressure_dof(&self) -> usize {
        self.pinned_pressure
    }

    /// Elimination order for P1 systems (nested dissection of the mesh graph).
    pub fn scalar_ordering(&self) -> Vec<usize> {
        nested_dissection(&adjacency(&self.p1_pattern), ND_LEAF)
    }

    /// Elimination order for the saddle system: every bubble first, then the
    /// vertices in nested-dissection order with `[U_x, U_y, p]` per vertex.
    /// Condensing the bubbles first makes the pressure diagonal nonzero, so
    /// diagonal pivots are normally acceptable.
    pub fn saddle_ordering(&self) -> Vec<usize> {
        let nv = self.n_scalar();
        let nvel = self.n_velocity();
        let mut order = Vec::with_capacity(self.n_saddle());
        for t in 0..self.geometry.len() {
            order.push(self.mini.bubble_dof(0, t));
            order.push(self.mini.bubble_dof(1, t));
        }
        for v in self.scalar_ordering() {
            order.extend([self.mini.vertex_dof(0, v), self.mini.vertex_dof(1, v), nvel + v]);
        }
        debug_assert_eq!(order.len(), nvel + nv);
        order
    }

    /// `∫ u_h` of a P1 field (exact).
    pub fn integrate(&self, u: &[T]) -> T {
        self.mass_rows.iter().zip(u).map(|(&m, &v)| m * v).sum()
    }

    /// `sqrt(u^T M u)`, the exact L2 norm of a P1 field.
    pub fn l2_norm(&self, u: &[T]) -> T {
        let mu = self.mass.matvec(u);
        mu.iter().zip(u).map(|(&a, &b)| a * b).sum::<T>().max(T::zero()).sqrt()
    }

    /// Degree-4 point values `f(t, q, λ)` on every element.
    pub fn quad_field(&self, mut f: impl FnMut(usize, usize, &[T; 3]) -> T) -> QuadField<T> {
        let nq = self.rule4.len();
        let mut values = Vec::with_capacity(self.geometry.len() * nq);
        for t in 0..self.geometry.len() {
            for (q, l) in self.rule4.points.iter().enumerate() {
                values.push(f(t, q, l));
            }
        }
        QuadField {
            rule: RuleKind::Degree4,
            n_points: nq,
            values,
        }
    }

    /// `a M + d K + W(w) + K(e)` on the P1 pattern, where `W(w)` is the
    /// weighted mass of a degree-4 point field and `K(e)` a stiffness with a
    /// per-element coefficient.
    pub fn scalar_operator(
        &self,
        mass_coeff: T,
        diffusion: T,
        reaction: Option<&QuadField<T>>,
        extra_diffusion: Option<&[T]>,
    ) -> Result<CsrMatrix<T>> {
        let mut a = CsrMatrix::zeros(Arc::clone(&self.p1_pattern));
        {
            let vals = a.values_mut();
            for ((v, &m), &k) in vals.iter_mut().zip(self.mass.values()).zip(self.stiffness.values()) {
                *v = mass_coeff * m + diffusion * k;
            }
        }
        if let Some(w) = reaction {
            self.check_field(w, "reaction weight")?;
            let vals = a.values_mut();
            for (t, g) in self.geometry.iter().enumerate() {
                let local = weighted_mass_local(g, &self.rule4, |q| w.at(t, q));
                for (s, &slot) in self.p1_slots[t].iter().enumerate() {
                    vals[slot] += local[s / 3][s % 3];
                }
            }
        }
        if let Some(e) = extra_diffusion {
            if e.len() != self.geometry.len() {
                return Err(Error::invalid("extra diffusion needs one value per element"));
            }
            let vals = a.values_mut();
            for (t, g) in self.geometry.iter().enumerate() {
                let local = stiffness_local(g, &self.rule2, |_| e[t]);
                for (s, &slot) in self.p1_slots[t].iter().enumerate() {
                    vals[slot] += local[s / 3][s % 3];
                }
            }
        }
        Ok(a)
    }

    /// `∫ w u_h φ_i` for a point field `w` and P1 `u_h`.
    pub fn weighted_load(&self, weight: &QuadField<T>, u: &[T]) -> Result<Vec<T>> {
        self.check_field(weight, "load weight")?;
        let mut b = vec![T::zero(); self.n_scalar()];
        let tris = self.mesh.triangles();
        for (t, g) in self.geometry.iter().enumerate() {
            let local = weighted_mass_local(g, &self.rule4, |q| weight.at(t, q));
            let tri = tris[t];
            for i in 0..3 {
                b[tri[i]] += (0..3).map(|j| local[i][j] * u[tri[j]]).sum::<T>();
            }
        }
        Ok(b)
    }

    fn check_field(&self, w: &QuadField<T>, what: &str) -> Result<()> {
        if w.rule != RuleKind::Degree4 || w.values.len() != self.geometry.len() * self.rule4.len() {
            return Err(Error::invalid(format!("{what} must be a degree-4 point field on this mesh")));
        }
        if let Some(element) = w.first_non_finite() {
            return Err(Error::NonFiniteElement {
                element,
                what: what.into(),
            });
        }
        Ok(())
    }

    /// Saddle matrix with `A = mass_coeff M + K(ν) + N(lag)`, velocity
    /// Dirichlet rows and the pressure pin applied.
    pub fn saddle_operator(&self, mass_coeff: T, nu: &QuadField<T>, lag: Option<&[T]>) -> Result<CsrMatrix<T>> {
        self.check_field(nu, "viscosity")?;
        if let Some(u) = lag {
            if u.len() != self.n_velocity() {
                return Err(Error::invalid("lagged velocity is not on the MINI layout"));
            }
        }
        let mut values = self.saddle_const.clone();
        let tris = self.mesh.triangles();
        for (t, g) in self.geometry.iter().enumerate() {
            let lag_local = lag.map(|u| velocity_local(u, &self.mini, t, tris[t]));
            let local = velocity_block_local(g, &self.rule4, mass_coeff, |q| nu.at(t, q), lag_local.as_ref());
            for (s, &slot) in self.vv_slots[t].iter().enumerate() {
                values[slot] += local[s / 8][s % 8];
            }
        }
        let pat = &self.saddle_pattern;
        let identity_row = |values: &mut [T], r: usize| {
            for k in pat.row_range(r) {
                values[k] = if pat.col_idx()[k] == r { T::one() } else { T::zero() };
            }
        };
        for &d in &self.velocity_boundary {
            identity_row(&mut values, d);
        }
        identity_row(&mut values, self.n_velocity() + self.pinned_pressure);
        CsrMatrix::from_parts(Arc::clone(&self.saddle_pattern), values)
    }

    /// Right-hand side `[mass_coeff M u_prev + F; 0]` with constrained rows zeroed.
    pub fn saddle_rhs(&self, mass_coeff: T, u_prev: &[T], forcing: Option<&[T]>) -> Vec<T> {
        let mut rhs = self.velocity_mass.matvec(u_prev);
        rhs.iter_mut().for_each(|v| *v *= mass_coeff);
        if let Some(f) = forcing {
            rhs.iter_mut().zip(f).for_each(|(r, &fi)| *r += fi);
        }
        for &d in &self.velocity_boundary {
            rhs[d] = T::zero();
        }
        rhs.resize(self.n_saddle(), T::zero());
        rhs
    }

    /// `∫ f · ξ_i` for a body force at time-independent points.
    pub fn velocity_load(&self, f: impl Fn(T, T) -> [T; 2]) -> Vec<T> {
        let mut b = vec![T::zero(); self.n_velocity()];
        let tris = self.mesh.triangles();
        for (t, g) in self.geometry.iter().enumerate() {
            let d = self.mini.velocity_element_dofs(t, tris[t]);
            let scale = g.area + g.area;
            for (l, &w) in self.rule4.points.iter().zip(&self.rule4.weights) {
                let (phi, _) = g.mini_basis(l);
                let p = g.point(l);
                let fv = f(p[0], p[1]);
                for c in 0..2 {
                    for j in 0..4 {
                        b[d[4 * c + j]] += w * scale * fv[c] * phi[j];
                    }
                }
            }
        }
        b
    }

    /// `∫ (U · ∇C) φ_i`.
    pub fn convection_load(&self, u: &[T], c: &[T]) -> Vec<T> {
        let mut b = vec![T::zero(); self.n_scalar()];
        let tris = self.mesh.triangles();
        for (t, g) in self.geometry.iter().enumerate() {
            let tri = tris[t];
            let ul = velocity_local(u, &self.mini, t, tri);
            let local = convection_load_local(g, &self.rule4, &ul, &[c[tri[0]], c[tri[1]], c[tri[2]]]);
            for k in 0..3 {
                b[tri[k]] += local[k];
            }
        }
        b
    }

    /// Per-element `½ h_T |U|` with `|U|` the largest speed at the element's
    /// quadrature points.
    pub fn artificial_diffusion(&self, u: &[T]) -> Vec<T> {
        let tris = self.mesh.triangles();
        self.geometry
            .iter()
            .enumerate()
            .map(|(t, g)| {
                let ul = velocity_local(u, &self.mini, t, tris[t]);
                let speed = self
                    .rule4
                    .points
                    .iter()
                    .map(|l| {
                        let (phi, dphi) = g.mini_basis(l);
                        let (v, _) = velocity_eval(&phi, &dphi, &ul);
                        v[0].hypot(v[1])
                    })
                    .fold(T::zero(), T::max);
                T::lit(0.5) * g.diameter() * speed
            })
            .collect()
    }

    /// Shifts a pressure field to zero mean.
    pub fn normalize_pressure(&self, p: &mut [T]) {
        let mean = self.integrate(p) / self.mesh.domain_area();
        p.iter_mut().for_each(|v| *v -= mean);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_mass_p1, assemble_mini_momentum_block, assemble_reaction_weighted_mass, assemble_stiffness_p1, Coefficient};
    use crate::sparse::solve_direct;

    #[test]
    fn cached_operators_match_direct_assembly() {
        let m = TriMesh::<f64>::unit_square(5, 4).unwrap();
        let d = Discretization::new(m.clone()).unwrap();
        let mass = assemble_mass_p1(&m);
        let k = assemble_stiffness_p1(&m, Coefficient::Constant(1.0)).unwrap();
        let w: Vec<f64> = m.vertices().iter().map(|p| 1.0 + p[0] * p[1]).collect();
        let wm = assemble_reaction_weighted_mass(&m, &w).unwrap();
        let tris = m.triangles();
        let wq = d.quad_field(|t, _, l| crate::fem::p1_value(&w, tris[t], l));
        let a = d.scalar_operator(2.0, 0.3, Some(&wq), None).unwrap();
        for i in 0..m.n_vertices() {
            for j in 0..m.n_vertices() {
                let expect = 2.0 * mass.get(i, j) + 0.3 * k.get(i, j) + wm.get(i, j);
                assert!((a.get(i, j) - expect).abs() < 1e-14);
            }
        }
        assert!((d.integrate(&vec![1.0; m.n_vertices()]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn saddle_velocity_block_matches_assembly() {
        let m = TriMesh::<f64>::unit_square(3, 3).unwrap();
        let d = Discretization::new(m.clone()).unwrap();
        let nu = QuadField::constant(m.n_triangles(), RuleKind::Degree4, 0.1);
        let u: Vec<f64> = (0..d.n_velocity()).map(|i| ((i * 7) % 5) as f64 * 0.1).collect();
        let s = d.saddle_operator(10.0, &nu, Some(&u)).unwrap();
        let a = assemble_mini_momentum_block(&m, &nu, Some(&u), 0.1).unwrap();
        let fixed = d.velocity_boundary_dofs();
        for i in 0..d.n_velocity() {
            for j in 0..d.n_velocity() {
                let expect = if fixed.binary_search(&i).is_ok() {
                    if i == j { 1.0 } else { 0.0 }
                } else {
                    a.get(i, j)
                };
                assert!((s.get(i, j) - expect).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn stokes_zero_forcing_gives_zero() {
        let m = TriMesh::<f64>::unit_square(4, 4).unwrap();
        let d = Discretization::new(m).unwrap();
        let nu = QuadField::constant(d.mesh().n_triangles(), RuleKind::Degree4, 1.0);
        let s = d.saddle_operator(0.0, &nu, None).unwrap();
        let rhs = vec![0.0; d.n_saddle()];
        let x = solve_direct(&s, &rhs).unwrap();
        assert!(x.iter().all(|v| v.abs() < 1e-300));
    }

    #[test]
    fn velocity_load_of_constant_force() {
        let m = TriMesh::<f64>::unit_square(3, 3).unwrap();
        let d = Discretization::new(m).unwrap();
        let b = d.velocity_load(|_, _| [1.0, 0.0]);
        // ∫ (sum of all x-basis functions) = |Ω| + Σ_T ∫ bubble
        let bubbles: f64 = d.geometry().iter().map(|g| g.area * 9.0 / 20.0).sum();
        let sx: f64 = b[..d.mini_layout().component_size()].iter().sum();
        assert!((sx - 1.0 - bubbles).abs() < 1e-13);
        assert!(b[d.mini_layout().component_size()..].iter().all(|&v| v == 0.0));
    }
}

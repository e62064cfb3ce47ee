//! Manufactured-solution convergence studies for the scalar transport
//! operator and the MINI Stokes discretisation.

use std::f64::consts::PI;
use std::sync::Arc;

use super::{ConvergenceRow, ConvergenceTable};
use crate::fem::{
    apply_dirichlet, h1_seminorm_error_p1, interpolate, interpolate_velocity, l2_error_p1, velocity_errors,
    DirichletMode, Discretization, QuadField, RuleKind,
};
use crate::mesh::TriMesh;
use crate::model::standard;
use crate::timestepper::{CachedSolver, SADDLE_PIVOT_THRESHOLD, SCALAR_PIVOT_THRESHOLD};
use crate::sparse::SolverKind;
use crate::{Error, Real, Result};

type Field<T> = Arc<dyn Fn(T, T, T) -> T + Send + Sync>;
type Gradient<T> = Arc<dyn Fn(T, T, T) -> [T; 2] + Send + Sync>;
type VectorField<T> = Arc<dyn Fn(T, T) -> [T; 2] + Send + Sync>;

/// Exact solution of `∂_t u + U·∇u − D Δu + λ u = f` with `u = 0` on the
/// boundary. `source` must be the matching `f`.
#[derive(Clone)]
pub struct ScalarMms<T> {
    pub exact: Field<T>,
    pub gradient: Gradient<T>,
    pub source: Field<T>,
    pub velocity: Option<VectorField<T>>,
    pub diffusion: T,
    pub reaction: T,
    /// `None` solves the steady problem.
    pub t_final: Option<T>,
    /// Time step as a multiple of `h²`.
    pub dt_over_h2: T,
}

impl<T> std::fmt::Debug for ScalarMms<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarMms").finish_non_exhaustive()
    }
}

fn sin_sin<T: Real>(x: T, y: T) -> T {
    let pi = T::lit(PI);
    (pi * x).sin() * (pi * y).sin()
}

fn sin_sin_grad<T: Real>(x: T, y: T) -> [T; 2] {
    let pi = T::lit(PI);
    [pi * (pi * x).cos() * (pi * y).sin(), pi * (pi * x).sin() * (pi * y).cos()]
}

impl<T: Real> ScalarMms<T> {
    /// `u = sin(πx) sin(πy)`, no flow, no reaction.
    pub fn steady_sine(diffusion: T) -> Self {
        let two_pi2 = T::lit(2.0 * PI * PI);
        Self {
            exact: Arc::new(|x, y, _| sin_sin(x, y)),
            gradient: Arc::new(|x, y, _| sin_sin_grad(x, y)),
            source: Arc::new(move |x, y, _| diffusion * two_pi2 * sin_sin(x, y)),
            velocity: None,
            diffusion,
            reaction: T::zero(),
            t_final: None,
            dt_over_h2: T::zero(),
        }
    }

    /// `u = e^{-t} sin(πx) sin(πy)` carried by the initial vortex.
    pub fn decaying_vortex() -> Self {
        let (d, lam) = (T::lit(0.1), T::lit(0.4));
        let two_pi2 = T::lit(2.0 * PI * PI);
        Self {
            exact: Arc::new(|x, y, t: T| (-t).exp() * sin_sin(x, y)),
            gradient: Arc::new(|x, y, t: T| {
                let g = sin_sin_grad(x, y);
                let e = (-t).exp();
                [e * g[0], e * g[1]]
            }),
            source: Arc::new(move |x, y, t: T| {
                let u = standard::velocity(x, y);
                let g = sin_sin_grad(x, y);
                (-t).exp() * ((d * two_pi2 + lam - T::one()) * sin_sin(x, y) + u[0] * g[0] + u[1] * g[1])
            }),
            velocity: Some(Arc::new(standard::velocity)),
            diffusion: d,
            reaction: lam,
            t_final: Some(T::lit(0.1)),
            dt_over_h2: T::lit(0.25),
        }
    }

    pub fn zero() -> Self {
        Self {
            exact: Arc::new(|_, _, _| T::zero()),
            gradient: Arc::new(|_, _, _| [T::zero(); 2]),
            source: Arc::new(|_, _, _| T::zero()),
            velocity: Some(Arc::new(standard::velocity)),
            diffusion: T::lit(0.1),
            reaction: T::lit(0.4),
            t_final: Some(T::lit(0.05)),
            dt_over_h2: T::lit(0.25),
        }
    }
}

fn load<T: Real>(disc: &Discretization<T>, f: impl Fn(T, T) -> T) -> Result<Vec<T>> {
    let mesh = disc.mesh();
    let w = disc.quad_field(|t, _, l| {
        let c = mesh.triangle_coords(t);
        let x = l[0] * c[0][0] + l[1] * c[1][0] + l[2] * c[2][0];
        let y = l[0] * c[0][1] + l[1] * c[1][1] + l[2] * c[2][1];
        f(x, y)
    });
    disc.weighted_load(&w, &vec![T::one(); disc.n_scalar()])
}

fn scalar_errors<T: Real>(mms: &ScalarMms<T>, n: usize) -> Result<[f64; 2]> {
    let disc = Discretization::new(TriMesh::unit_square(n, n)?)?;
    let h = T::one() / T::from_count(n);
    let fixed = disc.boundary_vertices().to_vec();
    let zeros = vec![T::zero(); fixed.len()];
    let mut solver = CachedSolver::new(disc.scalar_ordering(), T::lit(SCALAR_PIVOT_THRESHOLD), SolverKind::Direct);
    let (u, t_end) = match mms.t_final {
        None => {
            let mut a = disc.scalar_operator(mms.reaction, mms.diffusion, None, None)?;
            let mut b = load(&disc, |x, y| (mms.source)(x, y, T::zero()))?;
            if let Some(v) = &mms.velocity {
                let u = interpolate_velocity(disc.mesh(), |x, y| v(x, y))?;
                // steady convection is handled as a fixed-point correction
                let mut c = vec![T::zero(); disc.n_scalar()];
                for _ in 0..50 {
                    let adv = disc.convection_load(&u, &c);
                    let mut rhs: Vec<T> = b.iter().zip(&adv).map(|(&f, &a)| f - a).collect();
                    let mut m = a.clone();
                    apply_dirichlet(&mut m, &mut rhs, &fixed, &zeros, DirichletMode::RowReplace)?;
                    let next = solver.solve(&m, &rhs)?;
                    let delta = next.iter().zip(&c).map(|(&p, &q)| (p - q).abs()).fold(T::zero(), T::max);
                    c = next;
                    if delta < T::lit(1e-12) {
                        break;
                    }
                }
                (c, T::zero())
            } else {
                apply_dirichlet(&mut a, &mut b, &fixed, &zeros, DirichletMode::RowReplace)?;
                (solver.solve(&a, &b)?, T::zero())
            }
        }
        Some(t_final) => {
            if !(mms.dt_over_h2 > T::zero()) {
                return Err(Error::invalid("time-dependent study needs a positive dt/h²"));
            }
            let dt_target = mms.dt_over_h2 * h * h;
            let steps = (t_final / dt_target).ceil().as_f64().max(1.0) as usize;
            let dt = t_final / T::from_count(steps);
            let inv_dt = T::one() / dt;
            let vel = match &mms.velocity {
                Some(v) => Some(interpolate_velocity(disc.mesh(), |x, y| v(x, y))?),
                None => None,
            };
            let mut c = interpolate(disc.mesh(), &disc.p1_layout(), |x, y| (mms.exact)(x, y, T::zero()))?;
            let base = disc.scalar_operator(inv_dt + mms.reaction, mms.diffusion, None, None)?;
            for k in 1..=steps {
                let t = T::from_count(k) * dt;
                let f = load(&disc, |x, y| (mms.source)(x, y, t))?;
                let mc = disc.mass().matvec(&c);
                let mut rhs: Vec<T> = mc.iter().zip(&f).map(|(&m, &f)| m * inv_dt + f).collect();
                if let Some(u) = &vel {
                    let adv = disc.convection_load(u, &c);
                    rhs.iter_mut().zip(&adv).for_each(|(r, &a)| *r -= a);
                }
                let mut a = base.clone();
                apply_dirichlet(&mut a, &mut rhs, &fixed, &zeros, DirichletMode::RowReplace)?;
                c = solver.solve(&a, &rhs)?;
            }
            (c, t_final)
        }
    };
    let l2 = l2_error_p1(disc.mesh(), &u, |x, y| (mms.exact)(x, y, t_end));
    let h1 = h1_seminorm_error_p1(disc.mesh(), &u, |x, y| (mms.gradient)(x, y, t_end));
    Ok([l2.as_f64(), h1.as_f64()])
}

/// Errors at the final time on `n × n` unit-square meshes; columns `L2`, `H1`.
pub fn mms_scalar_study<T: Real>(mms: &ScalarMms<T>, sizes: &[usize]) -> Result<ConvergenceTable> {
    let mut table = ConvergenceTable::new(&["L2", "H1"]);
    for &n in sizes {
        let e = scalar_errors(mms, n)?;
        table.rows.push(ConvergenceRow {
            n,
            h: 1.0 / n as f64,
            errors: e.to_vec(),
        });
    }
    Ok(table)
}

/// Steady Stokes problem `−∇·(ν∇U) + ∇p = f`, `∇·U = 0`, `U = 0` on the
/// boundary, with mean-free `p`.
#[derive(Clone)]
pub struct StokesMms<T> {
    pub velocity: VectorField<T>,
    /// `jacobian[d][c] = ∂_c U_d`
    pub jacobian: Arc<dyn Fn(T, T) -> [[T; 2]; 2] + Send + Sync>,
    pub pressure: Arc<dyn Fn(T, T) -> T + Send + Sync>,
    pub nu: Arc<dyn Fn(T, T) -> T + Send + Sync>,
    pub forcing: VectorField<T>,
}

impl<T> std::fmt::Debug for StokesMms<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StokesMms").finish_non_exhaustive()
    }
}

fn vortex_jacobian<T: Real>(x: T, y: T) -> [[T; 2]; 2] {
    let pi = T::lit(PI);
    let two_pi = pi + pi;
    let half = T::lit(0.5);
    let (sx, sy) = ((pi * x).sin(), (pi * y).sin());
    [
        [pi * (two_pi * x).sin() * half * (two_pi * y).sin(), sx * sx * pi * (two_pi * y).cos()],
        [-(sy * sy) * pi * (two_pi * x).cos(), -(pi * (two_pi * y).sin() * half * (two_pi * x).sin())],
    ]
}

fn vortex_laplacian<T: Real>(x: T, y: T) -> [T; 2] {
    let pi = T::lit(PI);
    let pi2 = pi * pi;
    let two_pi = pi + pi;
    let four = T::lit(4.0);
    let (sx, sy) = ((pi * x).sin(), (pi * y).sin());
    [
        pi2 * (two_pi * y).sin() * (T::one() - four * sx * sx),
        -(pi2 * (two_pi * x).sin() * (T::one() - four * sy * sy)),
    ]
}

fn cos_cos<T: Real>(x: T, y: T) -> T {
    let pi = T::lit(PI);
    (pi * x).cos() * (pi * y).cos()
}

impl<T: Real> StokesMms<T> {
    /// The initial vortex with `p = cos(πx) cos(πy)` and constant `ν`.
    pub fn vortex(nu: T) -> Self {
        Self::vortex_with(Arc::new(move |_, _| nu), Arc::new(|_, _| [T::zero(); 2]))
    }

    /// The vortex with `ν = 1 + ½ sin(πx) sin(πy)`.
    pub fn vortex_variable_nu() -> Self {
        let half = T::lit(0.5);
        Self::vortex_with(
            Arc::new(move |x, y| T::one() + half * sin_sin(x, y)),
            Arc::new(move |x, y| {
                let g = sin_sin_grad(x, y);
                [half * g[0], half * g[1]]
            }),
        )
    }

    fn vortex_with(
        nu: Arc<dyn Fn(T, T) -> T + Send + Sync>,
        grad_nu: Arc<dyn Fn(T, T) -> [T; 2] + Send + Sync>,
    ) -> Self {
        let nu_f = Arc::clone(&nu);
        Self {
            velocity: Arc::new(standard::velocity),
            jacobian: Arc::new(vortex_jacobian),
            pressure: Arc::new(cos_cos),
            nu,
            forcing: Arc::new(move |x, y| {
                let pi = T::lit(PI);
                let (n, gn) = (nu_f(x, y), grad_nu(x, y));
                let lap = vortex_laplacian(x, y);
                let j = vortex_jacobian(x, y);
                let grad_p = [-(pi * (pi * x).sin() * (pi * y).cos()), -(pi * (pi * x).cos() * (pi * y).sin())];
                let mut f = [T::zero(); 2];
                for d in 0..2 {
                    f[d] = -(n * lap[d]) - (gn[0] * j[d][0] + gn[1] * j[d][1]) + grad_p[d];
                }
                f
            }),
        }
    }

    /// No flow, no pressure, no forcing.
    pub fn zero() -> Self {
        Self {
            velocity: Arc::new(|_, _| [T::zero(); 2]),
            jacobian: Arc::new(|_, _| [[T::zero(); 2]; 2]),
            pressure: Arc::new(|_, _| T::zero()),
            nu: Arc::new(|_, _| T::one()),
            forcing: Arc::new(|_, _| [T::zero(); 2]),
        }
    }
}

/// Discrete `(U, p)` of the steady problem on `disc`.
pub(crate) fn solve_stokes<T: Real>(mms: &StokesMms<T>, disc: &Discretization<T>) -> Result<(Vec<T>, Vec<T>)> {
    let mesh = disc.mesh();
    let nu: QuadField<T> = disc.quad_field(|t, _, l| {
        let c = mesh.triangle_coords(t);
        let x = l[0] * c[0][0] + l[1] * c[1][0] + l[2] * c[2][0];
        let y = l[0] * c[0][1] + l[1] * c[1][1] + l[2] * c[2][1];
        (mms.nu)(x, y)
    });
    debug_assert_eq!(nu.rule, RuleKind::Degree4);
    let a = disc.saddle_operator(T::zero(), &nu, None)?;
    let f = disc.velocity_load(|x, y| (mms.forcing)(x, y));
    let rhs = disc.saddle_rhs(T::zero(), &vec![T::zero(); disc.n_velocity()], Some(&f));
    let mut solver = CachedSolver::new(disc.saddle_ordering(), T::lit(SADDLE_PIVOT_THRESHOLD), SolverKind::Direct);
    let x = solver.solve(&a, &rhs)?;
    let nvel = disc.n_velocity();
    let mut p = x[nvel..].to_vec();
    disc.normalize_pressure(&mut p);
    Ok((x[..nvel].to_vec(), p))
}

/// Columns `u_L2`, `u_H1`, `p_L2` on `n × n` unit-square meshes.
pub fn mms_stokes_study<T: Real>(mms: &StokesMms<T>, sizes: &[usize]) -> Result<ConvergenceTable> {
    let mut table = ConvergenceTable::new(&["u_L2", "u_H1", "p_L2"]);
    for &n in sizes {
        let disc = Discretization::new(TriMesh::unit_square(n, n)?)?;
        let (u, p) = solve_stokes(mms, &disc)?;
        let ve = velocity_errors(disc.mesh(), &u, |x, y| (mms.velocity)(x, y), |x, y| (mms.jacobian)(x, y));
        let pe = l2_error_p1(disc.mesh(), &p, |x, y| (mms.pressure)(x, y));
        table.rows.push(ConvergenceRow {
            n,
            h: 1.0 / n as f64,
            errors: vec![ve.l2.as_f64(), ve.h1.as_f64(), pe.as_f64()],
        });
    }
    Ok(table)
}

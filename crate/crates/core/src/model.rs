//! Coefficients, coefficient functions, forcing and initial data.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::fem::{interpolate, interpolate_velocity, Discretization};
use crate::timestepper::State;
use crate::{Real, Result};

/// Default `β₀` for `β(C) = β₀ + C`.
pub const DEFAULT_BETA0: f64 = 0.3;
/// Default `ν₀` for `ν(C) = ν₀ + C`.
pub const DEFAULT_NU0: f64 = 0.1;
/// Default guard for the `SI/N` denominator.
pub const DEFAULT_N_FLOOR: f64 = 1e-10;

/// A scalar response `s ↦ f(s)` used for `β(C)` and `ν(C)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientFn<T> {
    Constant { c0: T },
    /// `c0 + s`
    Affine { c0: T },
    /// `min(hi, max(lo, c0 + s))`
    ClampedAffine { c0: T, lo: T, hi: T },
}

impl<T: Real> CoefficientFn<T> {
    #[inline]
    pub fn eval(&self, s: T) -> T {
        match *self {
            CoefficientFn::Constant { c0 } => c0,
            CoefficientFn::Affine { c0 } => c0 + s,
            CoefficientFn::ClampedAffine { c0, lo, hi } => (c0 + s).max(lo).min(hi),
        }
    }

    pub fn base(&self) -> T {
        match *self {
            CoefficientFn::Constant { c0 } | CoefficientFn::Affine { c0 } | CoefficientFn::ClampedAffine { c0, .. } => c0,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, CoefficientFn::Constant { .. })
    }
}

/// `f(x, y, t)` for Navier–Stokes forcing.
pub type ForcingFn<T> = dyn Fn(T, T, T) -> [T; 2] + Send + Sync;

/// Body force in the momentum equation.
#[derive(Clone, Default)]
pub enum Forcing<T> {
    #[default]
    Zero,
    Constant([T; 2]),
    Custom(Arc<ForcingFn<T>>),
}

impl<T: Real> Forcing<T> {
    pub fn eval(&self, x: T, y: T, t: T) -> [T; 2] {
        match self {
            Forcing::Zero => [T::zero(); 2],
            Forcing::Constant(v) => *v,
            Forcing::Custom(f) => f(x, y, t),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Forcing::Zero => true,
            Forcing::Constant(v) => v[0] == T::zero() && v[1] == T::zero(),
            Forcing::Custom(_) => false,
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Forcing<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::Zero => write!(f, "Zero"),
            Forcing::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            Forcing::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl<T: PartialEq> PartialEq for Forcing<T> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Forcing::Zero, Forcing::Zero) => true,
            (Forcing::Constant(a), Forcing::Constant(b)) => a == b,
            (Forcing::Custom(a), Forcing::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// All model coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    pub d_s: T,
    pub d_i: T,
    pub d_r: T,
    pub d_c: T,
    /// pathogen shedding by infected hosts
    pub alpha: T,
    /// recovery
    pub gamma: T,
    /// pathogen decay
    pub lambda: T,
    /// natural death
    pub eta: T,
    /// birth / recruitment `Λ`
    pub birth: T,
    pub beta: CoefficientFn<T>,
    pub nu: CoefficientFn<T>,
    pub forcing: Forcing<T>,
    pub n_floor: T,
}

impl<T: Real> Default for ModelParams<T> {
    /// Table values of the reference experiments with constant `β₀`, `ν₀`.
    fn default() -> Self {
        Self {
            d_s: T::lit(0.2),
            d_i: T::lit(0.3),
            d_r: T::lit(0.4),
            d_c: T::lit(0.1),
            alpha: T::lit(0.6),
            gamma: T::lit(0.4),
            lambda: T::lit(0.4),
            eta: T::lit(0.05),
            birth: T::lit(0.4),
            beta: CoefficientFn::Constant { c0: T::lit(DEFAULT_BETA0) },
            nu: CoefficientFn::Constant { c0: T::lit(DEFAULT_NU0) },
            forcing: Forcing::Zero,
            n_floor: T::lit(DEFAULT_N_FLOOR),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Fatal,
}

/// One breached assumption.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl<T: Real> ModelParams<T> {
    /// Checks positivity of rates and the bounds on `β` and `ν`. Never fails;
    /// an empty list means every assumption holds.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        fn fatal(out: &mut Vec<Violation>, message: String) {
            out.push(Violation {
                severity: Severity::Fatal,
                message,
            })
        }
        for (name, v) in [("D_S", self.d_s), ("D_I", self.d_i), ("D_R", self.d_r), ("D_C", self.d_c)] {
            if !(v > T::zero()) || !v.is_finite() {
                fatal(&mut out, format!("(A-diffusion): {name} must be positive"));
            }
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("gamma", self.gamma),
            ("lambda", self.lambda),
            ("eta", self.eta),
            ("Lambda", self.birth),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                fatal(&mut out, format!("(A-rates): {name} must be nonnegative"));
            }
        }
        if !(self.n_floor > T::zero()) {
            fatal(&mut out, "(A-guard): n_floor must be positive".into());
        }
        for (sym, coef) in [("β", self.beta), ("ν", self.nu)] {
            match coef {
                CoefficientFn::Constant { c0 } if !(c0 > T::zero()) => {
                    fatal(&mut out, format!("(A1): constant {sym} must be positive"));
                }
                CoefficientFn::Affine { c0 } => {
                    if !(c0 > T::zero()) {
                        fatal(&mut out, format!("(A1): {sym}₀ must be positive"));
                    }
                    out.push(Violation {
                        severity: Severity::Warning,
                        message: format!("unbounded {sym} violates (A1) upper bound"),
                    });
                }
                CoefficientFn::ClampedAffine { lo, hi, .. } if !(lo > T::zero() && lo <= hi) => {
                    out.push(Violation {
                        severity: Severity::Fatal,
                        message: format!("(A1): clamp bounds for {sym} need 0 < lo <= hi"),
                    });
                }
                _ => {}
            }
        }
        out
    }

    pub fn has_fatal(&self) -> bool {
        self.validate().iter().any(|v| v.severity == Severity::Fatal)
    }
}

/// `max(S + I + R, n_floor)`.
#[inline]
pub fn safe_population<T: Real>(s: T, i: T, r: T, n_floor: T) -> T {
    (s + i + r).max(n_floor)
}

/// Pointwise initial fields.
pub trait InitialFields<T>: Send + Sync {
    fn velocity(&self, x: T, y: T) -> [T; 2];
    fn pathogen(&self, x: T, y: T) -> T;
    fn susceptible(&self, x: T, y: T) -> T;
    fn infected(&self, x: T, y: T) -> T;
    fn recovered(&self, x: T, y: T) -> T;
}

/// Named initial-data presets.
#[derive(Clone)]
pub enum InitialData<T> {
    /// Vortex flow, central pathogen plume, Gaussian hosts (the reference
    /// experiments).
    Standard,
    /// Spatially constant `S, I, R, C`, fluid at rest.
    Uniform { s: T, i: T, r: T, c: T },
    Zero,
    Custom(Arc<dyn InitialFields<T>>),
}

impl<T: fmt::Debug> fmt::Debug for InitialData<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialData::Standard => write!(f, "Standard"),
            InitialData::Uniform { s, i, r, c } => f
                .debug_struct("Uniform")
                .field("s", s)
                .field("i", i)
                .field("r", r)
                .field("c", c)
                .finish(),
            InitialData::Zero => write!(f, "Zero"),
            InitialData::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl<T: PartialEq> PartialEq for InitialData<T> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (InitialData::Standard, InitialData::Standard) | (InitialData::Zero, InitialData::Zero) => true,
            (
                InitialData::Uniform { s, i, r, c },
                InitialData::Uniform {
                    s: s2,
                    i: i2,
                    r: r2,
                    c: c2,
                },
            ) => s == s2 && i == i2 && r == r2 && c == c2,
            (InitialData::Custom(a), InitialData::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// The reference initial data.
pub mod standard {
    use super::*;

    fn r2<T: Real>(x: T, y: T) -> T {
        let h = T::lit(0.5);
        (x - h) * (x - h) + (y - h) * (y - h)
    }

    /// `U₀`; divergence-free with stream function `sin²(πx) sin²(πy) / (2π)`.
    pub fn velocity<T: Real>(x: T, y: T) -> [T; 2] {
        let pi = T::lit(PI);
        let (sx, cx) = ((pi * (x - T::one())).sin(), (pi * (x - T::one())).cos());
        let (sy, cy) = ((pi * (y - T::one())).sin(), (pi * (y - T::one())).cos());
        [sx * sx * sy * cy, -(sy * sy) * sx * cx]
    }

    pub fn pathogen<T: Real>(x: T, y: T) -> T {
        let r2 = r2(x, y);
        (T::lit(0.5) + T::lit(100.0) * r2) * (-r2).exp()
    }

    pub fn susceptible<T: Real>(x: T, y: T) -> T {
        let r2 = r2(x, y);
        if r2 <= T::one() {
            T::lit(0.9) * (-r2).exp()
        } else {
            T::zero()
        }
    }

    pub fn infected<T: Real>(x: T, y: T) -> T {
        let r2 = r2(x, y);
        if r2 <= T::lit(0.1) {
            T::lit(0.1) * (-r2).exp()
        } else {
            T::zero()
        }
    }

    pub fn recovered<T: Real>(x: T, y: T) -> T {
        let (dx, dy) = (x - T::lit(0.7), y - T::lit(0.3));
        let hundred = T::lit(100.0);
        T::lit(0.01) * (T::lit(0.5) + T::lit(5.0) * (dx * dx + dy * dy)) * (-hundred * dx * dx - hundred * dy * dy).exp()
    }
}

/// Interpolates `data` onto the discretisation at `t = 0`. The pathogen is
/// set to zero on the boundary to honour its Dirichlet condition; velocity
/// vanishes there for every preset.
pub fn initial_state<T: Real>(data: &InitialData<T>, disc: &Discretization<T>) -> Result<State<T>> {
    let mesh = disc.mesh();
    let p1 = disc.p1_layout();
    let n = disc.n_scalar();
    let (u, mut c, s, i, r) = match data {
        InitialData::Standard => (
            interpolate_velocity(mesh, standard::velocity)?,
            interpolate(mesh, &p1, standard::pathogen)?,
            interpolate(mesh, &p1, standard::susceptible)?,
            interpolate(mesh, &p1, standard::infected)?,
            interpolate(mesh, &p1, standard::recovered)?,
        ),
        InitialData::Uniform { s, i, r, c } => (
            vec![T::zero(); disc.n_velocity()],
            vec![*c; n],
            vec![*s; n],
            vec![*i; n],
            vec![*r; n],
        ),
        InitialData::Zero => (
            vec![T::zero(); disc.n_velocity()],
            vec![T::zero(); n],
            vec![T::zero(); n],
            vec![T::zero(); n],
            vec![T::zero(); n],
        ),
        InitialData::Custom(f) => (
            interpolate_velocity(mesh, |x, y| f.velocity(x, y))?,
            interpolate(mesh, &p1, |x, y| f.pathogen(x, y))?,
            interpolate(mesh, &p1, |x, y| f.susceptible(x, y))?,
            interpolate(mesh, &p1, |x, y| f.infected(x, y))?,
            interpolate(mesh, &p1, |x, y| f.recovered(x, y))?,
        ),
    };
    let mut u = u;
    for &d in disc.velocity_boundary_dofs() {
        u[d] = T::zero();
    }
    for &v in disc.boundary_vertices() {
        c[v] = T::zero();
    }
    Ok(State {
        t: T::zero(),
        step: 0,
        u,
        p: vec![T::zero(); n],
        c,
        s,
        i,
        r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::TriMesh;

    #[test]
    fn table_values_validate_cleanly() {
        let p = ModelParams::<f64>::default();
        assert!(p.validate().is_empty());
        assert_eq!((p.d_s, p.d_i, p.d_r, p.d_c), (0.2, 0.3, 0.4, 0.1));
        assert_eq!((p.alpha, p.gamma, p.lambda, p.eta, p.birth), (0.6, 0.4, 0.4, 0.05, 0.4));
    }

    #[test]
    fn zero_pathogen_diffusion_is_fatal() {
        let p = ModelParams::<f64> {
            d_c: 0.0,
            ..Default::default()
        };
        let v = p.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].message, "(A-diffusion): D_C must be positive");
        assert!(p.has_fatal());
    }

    #[test]
    fn affine_beta_warns() {
        let p = ModelParams::<f64> {
            beta: CoefficientFn::Affine { c0: 0.3 },
            ..Default::default()
        };
        let v = p.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].severity, Severity::Warning);
        assert_eq!(v[0].message, "unbounded β violates (A1) upper bound");
        assert!(!p.has_fatal());
    }

    #[test]
    fn coefficient_evaluation() {
        assert_eq!(CoefficientFn::Constant { c0: 0.4 }.eval(7.0), 0.4);
        assert_eq!(CoefficientFn::Affine { c0: 0.3 }.eval(0.0), 0.3);
        let c = CoefficientFn::ClampedAffine {
            c0: 0.1,
            lo: 0.05,
            hi: 2.0,
        };
        assert_eq!(c.eval(5.0), 2.0);
        assert_eq!(c.eval(-1.0), 0.05);
    }

    #[test]
    fn population_guard() {
        assert_eq!(safe_population(0.9, 0.1, 0.0, 1e-10), 1.0);
        assert_eq!(safe_population(0.0, 0.0, 0.0, 1e-10), 1e-10);
        assert_eq!(safe_population(0.5, 0.25, 0.25, 1e-10), 1.0);
    }

    #[test]
    fn standard_initial_values() {
        assert!((standard::infected(0.5f64, 0.5) - 0.1).abs() < 1e-15);
        assert_eq!(standard::infected(0.9, 0.9), 0.0);
        assert!((standard::recovered(0.7f64, 0.3) - 0.005).abs() < 1e-15);
        assert!((standard::susceptible(0.5f64, 0.5) - 0.9).abs() < 1e-15);
        assert!((standard::pathogen(0.5f64, 0.5) - 0.5).abs() < 1e-15);
        for (x, y) in [(0.0, 0.3), (1.0, 0.7), (0.2, 0.0), (0.6, 1.0)] {
            let u: [f64; 2] = standard::velocity(x, y);
            assert!(u[0].abs() < 1e-15 && u[1].abs() < 1e-15);
        }
    }

    #[test]
    fn standard_velocity_matches_stream_function() {
        // U = (∂_y ψ, -∂_x ψ), ψ = sin²(πx) sin²(πy) / (2π)
        for &(x, y) in &[(0.1, 0.2), (0.45, 0.8), (0.9, 0.33)] {
            let u = standard::velocity(x, y);
            let (sx, sy) = ((PI * x).sin(), (PI * y).sin());
            let ux = sx * sx * sy * (PI * y).cos();
            let uy = -sy * sy * sx * (PI * x).cos();
            assert!((u[0] - ux).abs() < 1e-14 && (u[1] - uy).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_preset_is_zero() {
        let d = Discretization::new(TriMesh::<f64>::unit_square(3, 3).unwrap()).unwrap();
        let s = initial_state(&InitialData::Zero, &d).unwrap();
        for f in [&s.u, &s.p, &s.c, &s.s, &s.i, &s.r] {
            assert!(f.iter().all(|&v| v == 0.0));
        }
        let st = initial_state(&InitialData::Standard, &d).unwrap();
        for &v in d.boundary_vertices() {
            assert_eq!(st.c[v], 0.0);
        }
    }
}

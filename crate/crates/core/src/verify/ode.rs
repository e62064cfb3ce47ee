//! The spatially homogeneous limit: with uniform data, `C ≡ 0`, `U ≡ 0`
//! and constant `β`, every nodal value follows the SIR ODE.

use std::sync::Arc;

use crate::fem::Discretization;
use crate::mesh::TriMesh;
use crate::model::{initial_state, safe_population, InitialData, ModelParams};
use crate::timestepper::{MonitorConfig, SchemeOptions, StepControls, Stepper};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeState<T> {
    pub t: T,
    pub s: T,
    pub i: T,
    pub r: T,
}

/// Right-hand side `(S', I', R')` with `β = β(0)`.
pub fn sir_rhs<T: Real>(p: &ModelParams<T>, s: T, i: T, r: T) -> [T; 3] {
    let beta = p.beta.eval(T::zero());
    let infection = beta * s * i / safe_population(s, i, r, p.n_floor);
    [
        p.birth - infection - p.eta * s,
        infection - (p.gamma + p.eta) * i,
        p.gamma * i - p.eta * r,
    ]
}

/// Classical RK4 from `y0.t` to `t_final`, storing every step.
pub fn sir_ode_oracle<T: Real>(p: &ModelParams<T>, y0: OdeState<T>, t_final: T, dt: T) -> Result<Vec<OdeState<T>>> {
    if !p.beta.is_constant() {
        return Err(Error::invalid("the ODE limit needs a constant transmission rate"));
    }
    if !(dt > T::zero()) {
        return Err(Error::invalid("dt must be positive"));
    }
    let steps = ((t_final - y0.t) / dt - T::lit(1e-9)).ceil().max(T::zero()).as_f64() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(y0);
    let mut y = [y0.s, y0.i, y0.r];
    let f = |y: &[T; 3]| sir_rhs(p, y[0], y[1], y[2]);
    let axpy = |y: &[T; 3], k: &[T; 3], a: T| [y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2]];
    let (half, two, six) = (T::lit(0.5), T::lit(2.0), T::lit(6.0));
    for n in 1..=steps {
        let k1 = f(&y);
        let k2 = f(&axpy(&y, &k1, half * dt));
        let k3 = f(&axpy(&y, &k2, half * dt));
        let k4 = f(&axpy(&y, &k3, dt));
        for c in 0..3 {
            y[c] += dt / six * (k1[c] + two * k2[c] + two * k3[c] + k4[c]);
        }
        out.push(OdeState {
            t: y0.t + T::from_count(n) * dt,
            s: y[0],
            i: y[1],
            r: y[2],
        });
    }
    Ok(out)
}

/// Largest relative deviation per compartment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeDeviation {
    pub s: f64,
    pub i: f64,
    pub r: f64,
}

impl OdeDeviation {
    pub fn max(&self) -> f64 {
        self.s.max(self.i).max(self.r)
    }
}

/// Compares spatial means of a PDE run against an ODE trajectory. Every PDE
/// time must appear in the ODE time grid (within `1e-9` relative).
pub fn compare_pde_to_ode<T: Real>(pde: &[OdeState<T>], ode: &[OdeState<T>]) -> Result<OdeDeviation> {
    let mut dev = OdeDeviation { s: 0.0, i: 0.0, r: 0.0 };
    for q in pde {
        let t = q.t.as_f64();
        let k = ode.partition_point(|o| o.t.as_f64() < t - 1e-9 * t.abs().max(1.0));
        let o = ode
            .get(k)
            .filter(|o| (o.t.as_f64() - t).abs() <= 1e-9 * t.abs().max(1.0))
            .ok_or_else(|| Error::invalid(format!("mismatched time grids: no ODE value at t = {t}")))?;
        let rel = |a: T, b: T| (a - b).abs().as_f64() / b.as_f64().max(1e-12);
        dev.s = dev.s.max(rel(q.s, o.s));
        dev.i = dev.i.max(rel(q.i, o.i));
        dev.r = dev.r.max(rel(q.r, o.r));
    }
    Ok(dev)
}

/// Runs the PDE from uniform data on an `n × n` mesh with flow and
/// shedding switched off, and compares spatial means against RK4 at
/// `dt / 10`.
pub fn homogeneous_limit_deviation<T: Real>(
    params: &ModelParams<T>,
    y0: OdeState<T>,
    n: usize,
    dt: T,
    t_final: T,
) -> Result<OdeDeviation> {
    let p = ModelParams {
        alpha: T::zero(),
        ..params.clone()
    };
    let disc = Arc::new(Discretization::new(TriMesh::unit_square(n, n)?)?);
    let data = InitialData::Uniform {
        s: y0.s,
        i: y0.i,
        r: y0.r,
        c: T::zero(),
    };
    let mut state = initial_state(&data, &disc)?;
    state.t = y0.t;
    let controls = StepControls {
        dt,
        ..Default::default()
    };
    let options = SchemeOptions {
        fluid_enabled: false,
        ..Default::default()
    };
    let mut stepper = Stepper::new(Arc::clone(&disc), p.clone(), controls, options)?;
    let area = disc.mesh().domain_area();
    let mut means = Vec::new();
    stepper.run_with(&state, t_final, MonitorConfig::default(), |st, _, _| {
        means.push(OdeState {
            t: st.t,
            s: disc.integrate(&st.s) / area,
            i: disc.integrate(&st.i) / area,
            r: disc.integrate(&st.r) / area,
        });
        Ok(())
    })?;
    let ode = sir_ode_oracle(&p, y0, t_final, dt / T::lit(10.0))?;
    compare_pde_to_ode(&means, &ode)
}

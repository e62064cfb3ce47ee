use crate::fem::{velocity_errors, Discretization};
use crate::scalar::norm_inf;
use crate::timestepper::State;
use crate::Real;

/// Scalar diagnostics of one state. Integrals use the exact P1 mass row
/// sums, the same weights as the assembled mass matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MonitorRecord {
    pub t: f64,
    pub min_s: f64,
    pub max_s: f64,
    pub min_i: f64,
    pub max_i: f64,
    pub min_r: f64,
    pub max_r: f64,
    pub min_c: f64,
    pub max_c: f64,
    pub int_s: f64,
    pub int_i: f64,
    pub int_r: f64,
    pub int_c: f64,
    pub int_n: f64,
    pub l2_u: f64,
    /// `||∇U||_{L2}`
    pub h1_u: f64,
    /// `||B U||_inf`
    pub div_res: f64,
    pub max_u: f64,
    pub picard_iters: usize,
}

fn min_max<T: Real>(v: &[T]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let lo = v.iter().copied().fold(T::infinity(), T::min);
    let hi = v.iter().copied().fold(T::neg_infinity(), T::max);
    (lo.as_f64(), hi.as_f64())
}

pub fn monitor_row<T: Real>(disc: &Discretization<T>, state: &State<T>, picard_iters: usize) -> MonitorRecord {
    let (min_s, max_s) = min_max(&state.s);
    let (min_i, max_i) = min_max(&state.i);
    let (min_r, max_r) = min_max(&state.r);
    let (min_c, max_c) = min_max(&state.c);
    let (int_s, int_i, int_r) = (disc.integrate(&state.s), disc.integrate(&state.i), disc.integrate(&state.r));
    let norms = velocity_errors(disc.mesh(), &state.u, |_, _| [T::zero(); 2], |_, _| [[T::zero(); 2]; 2]);
    MonitorRecord {
        t: state.t.as_f64(),
        min_s,
        max_s,
        min_i,
        max_i,
        min_r,
        max_r,
        min_c,
        max_c,
        int_s: int_s.as_f64(),
        int_i: int_i.as_f64(),
        int_r: int_r.as_f64(),
        int_c: disc.integrate(&state.c).as_f64(),
        int_n: (int_s + int_i + int_r).as_f64(),
        l2_u: norms.l2.as_f64(),
        h1_u: norms.h1.as_f64(),
        div_res: norm_inf(&disc.divergence().matvec(&state.u)).as_f64(),
        max_u: norm_inf(&state.u).as_f64(),
        picard_iters,
    }
}

//! Backward Euler in time with a Picard loop over the couplings.
//!
//! One step solves, in order: the momentum/continuity saddle system for
//! `(U, p)`, the three host equations, then the pathogen equation. Lagged
//! coefficients come from the previous Picard iterate.

mod solver;

use std::sync::Arc;

pub use solver::{CachedSolver, SolveStats};

use crate::fem::{p1_value, Discretization, QuadField};
use crate::model::{safe_population, ModelParams};
use crate::scalar::{norm2, norm_inf};
use crate::sparse::SolverKind;
use crate::verify::{monitor_row, MonitorRecord};
use crate::{Error, Real, Result};

/// Coefficient vectors at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct State<T> {
    pub t: T,
    pub step: usize,
    /// MINI velocity
    pub u: Vec<T>,
    /// P1 pressure, zero mean
    pub p: Vec<T>,
    pub c: Vec<T>,
    pub s: Vec<T>,
    pub i: Vec<T>,
    pub r: Vec<T>,
}

impl<T: Real> State<T> {
    pub fn zeros(disc: &Discretization<T>) -> Self {
        let n = disc.n_scalar();
        Self {
            t: T::zero(),
            step: 0,
            u: vec![T::zero(); disc.n_velocity()],
            p: vec![T::zero(); n],
            c: vec![T::zero(); n],
            s: vec![T::zero(); n],
            i: vec![T::zero(); n],
            r: vec![T::zero(); n],
        }
    }

    fn fields(&self) -> [&[T]; 6] {
        [&self.u, &self.p, &self.c, &self.s, &self.i, &self.r]
    }

    pub fn is_finite(&self) -> bool {
        self.fields().iter().all(|f| f.iter().all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PicardMode {
    /// One pass through the stages per step.
    SingleSweep,
    /// Iterate the stages until the update falls below `picard_tol`.
    #[default]
    ToConvergence,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControls<T> {
    pub dt: T,
    pub picard_mode: PicardMode,
    pub picard_tol: T,
    pub picard_max: usize,
}

impl<T: Real> Default for StepControls<T> {
    fn default() -> Self {
        Self {
            dt: T::lit(0.01),
            picard_mode: PicardMode::ToConvergence,
            picard_tol: T::lit(1e-8),
            picard_max: 50,
        }
    }
}

impl<T: Real> StepControls<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.picard_tol > T::zero()) {
            return Err(Error::invalid("picard_tol must be positive"));
        }
        if self.picard_max < 1 {
            return Err(Error::invalid("picard_max must be at least 1"));
        }
        Ok(())
    }
}

/// Switches selecting which parts of the system are advanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeOptions {
    /// Solve the Navier–Stokes stage; otherwise `U` and `p` stay frozen.
    pub fluid_enabled: bool,
    /// Keep `S, I, R` at their initial values.
    pub sir_frozen: bool,
    /// Keep `C` at its initial value.
    pub pathogen_frozen: bool,
    /// Include `(U·∇)U^k` in the momentum equation (off gives Stokes).
    pub momentum_convection: bool,
    /// Add `½ h |U|` diffusion to the pathogen equation.
    pub artificial_diffusion: bool,
    /// Replace negative nodal values of `S, I, R, C` by zero after each step.
    pub clip_negative: bool,
    pub solver: SolverKind,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self {
            fluid_enabled: true,
            sir_frozen: false,
            pathogen_frozen: false,
            momentum_convection: true,
            artificial_diffusion: false,
            clip_negative: false,
            solver: SolverKind::Direct,
        }
    }
}

/// Outcome of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub picard_iterations: usize,
    pub converged: bool,
    /// Largest relative update of the final Picard iteration.
    pub last_update: f64,
    /// `||B U||_inf / max(1, ||U||_inf)` after the last momentum solve.
    pub divergence: f64,
}

/// How often to record monitors and keep snapshots (in steps).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonitorConfig {
    pub monitor_every: usize,
    pub snapshot_every: usize,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self {
            monitor_every: 1,
            snapshot_every: 500,
        }
    }
}

/// Output of [`Stepper::run`].
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub monitors: Vec<MonitorRecord>,
    pub snapshots: Vec<State<T>>,
    pub reports: Vec<StepReport>,
    pub last: State<T>,
}

pub(crate) const SADDLE_PIVOT_THRESHOLD: f64 = 1e-6;
pub(crate) const SCALAR_PIVOT_THRESHOLD: f64 = 0.1;

/// Advances states on one discretisation, caching factorisations between
/// steps.
pub struct Stepper<T: Real> {
    disc: Arc<Discretization<T>>,
    params: ModelParams<T>,
    controls: StepControls<T>,
    options: SchemeOptions,
    saddle: CachedSolver<T>,
    host: [CachedSolver<T>; 3],
    pathogen: CachedSolver<T>,
    forcing_cache: Option<(T, Vec<T>)>,
}

impl<T: Real> Stepper<T> {
    pub fn new(
        disc: Arc<Discretization<T>>,
        params: ModelParams<T>,
        controls: StepControls<T>,
        options: SchemeOptions,
    ) -> Result<Self> {
        controls.validate()?;
        if let Some(v) = params.validate().into_iter().find(|v| v.severity == crate::model::Severity::Fatal) {
            return Err(Error::invalid(v.message));
        }
        let scalar_order = disc.scalar_ordering();
        let scalar = || CachedSolver::new(scalar_order.clone(), T::lit(SCALAR_PIVOT_THRESHOLD), options.solver);
        Ok(Self {
            saddle: CachedSolver::new(disc.saddle_ordering(), T::lit(SADDLE_PIVOT_THRESHOLD), options.solver),
            host: [scalar(), scalar(), scalar()],
            pathogen: scalar(),
            disc,
            params,
            controls,
            options,
            forcing_cache: None,
        })
    }

    pub fn discretization(&self) -> &Arc<Discretization<T>> {
        &self.disc
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn controls(&self) -> &StepControls<T> {
        &self.controls
    }

    pub fn options(&self) -> &SchemeOptions {
        &self.options
    }

    /// Solver counters for the saddle, S, I, R and C systems.
    pub fn solver_stats(&self) -> [SolveStats; 5] {
        [
            self.saddle.stats(),
            self.host[0].stats(),
            self.host[1].stats(),
            self.host[2].stats(),
            self.pathogen.stats(),
        ]
    }

    fn forcing_load(&mut self, t: T) -> Option<Vec<T>> {
        if self.params.forcing.is_zero() {
            return None;
        }
        if let Some((tc, load)) = &self.forcing_cache {
            if *tc == t {
                return Some(load.clone());
            }
        }
        let f = self.params.forcing.clone();
        let load = self.disc.velocity_load(|x, y| f.eval(x, y, t));
        self.forcing_cache = Some((t, load.clone()));
        Some(load)
    }

    fn check_state(&self, s: &State<T>) -> Result<()> {
        let d = &self.disc;
        if s.u.len() != d.n_velocity()
            || [&s.p, &s.c, &s.s, &s.i, &s.r].iter().any(|f| f.len() != d.n_scalar())
        {
            return Err(Error::invalid("state does not match the discretisation"));
        }
        if !s.is_finite() {
            return Err(Error::invalid("state has non-finite entries"));
        }
        Ok(())
    }

    /// Advances `state` by one time step.
    pub fn step(&mut self, state: &State<T>) -> Result<(State<T>, StepReport)> {
        self.check_state(state)?;
        let dt = self.controls.dt;
        let inv_dt = T::one() / dt;
        let t_next = state.t + dt;
        let disc = Arc::clone(&self.disc);
        let p = self.params.clone();
        let opts = self.options;
        let tris = disc.mesh().triangles();
        let mass = disc.mass();
        let forcing = if opts.fluid_enabled { self.forcing_load(t_next) } else { None };

        // right-hand sides that only depend on level n
        let scaled = |v: &[T], a: T| -> Vec<T> { mass.matvec(v).into_iter().map(|x| x * a).collect() };
        let rhs_s: Vec<T> = scaled(&state.s, inv_dt)
            .into_iter()
            .zip(disc.mass_row_sums())
            .map(|(a, &m)| a + p.birth * m)
            .collect();
        let rhs_i = scaled(&state.i, inv_dt);
        let rhs_r = scaled(&state.r, inv_dt);
        let rhs_c = scaled(&state.c, inv_dt);
        let saddle_rhs = disc.saddle_rhs(inv_dt, &state.u, forcing.as_deref());

        let mut iter = state.clone();
        iter.t = t_next;
        iter.step = state.step + 1;
        let mut report = StepReport {
            picard_iterations: 0,
            converged: false,
            last_update: f64::INFINITY,
            divergence: 0.0,
        };
        let max_iter = match self.controls.picard_mode {
            PicardMode::SingleSweep => 1,
            PicardMode::ToConvergence => self.controls.picard_max,
        };
        for _ in 0..max_iter {
            let mut next = iter.clone();

            // (1) momentum and continuity
            if opts.fluid_enabled {
                let nu_field = if p.nu.is_constant() {
                    QuadField::constant(tris.len(), crate::fem::RuleKind::Degree4, p.nu.base())
                } else {
                    disc.quad_field(|t, _, l| p.nu.eval(p1_value(&iter.c, tris[t], l)))
                };
                let lag = if opts.momentum_convection { Some(iter.u.as_slice()) } else { None };
                let a = disc.saddle_operator(inv_dt, &nu_field, lag)?;
                let x = self
                    .saddle
                    .solve(&a, &saddle_rhs)
                    .map_err(|e| e.in_subsystem("momentum"))?;
                let nvel = disc.n_velocity();
                next.u.copy_from_slice(&x[..nvel]);
                next.p.copy_from_slice(&x[nvel..]);
                disc.normalize_pressure(&mut next.p);
                let bu = disc.divergence().matvec(&next.u);
                report.divergence = (norm_inf(&bu) / norm_inf(&next.u).max(T::one())).as_f64();
            }

            // (2) host compartments with lagged reaction weights
            if !opts.sir_frozen {
                let (mut w_s, mut w_i) = (Vec::new(), Vec::new());
                let nq = disc.rule().len();
                w_s.reserve(tris.len() * nq);
                w_i.reserve(tris.len() * nq);
                for &tri in tris {
                    for l in &disc.rule().points {
                        let (s, i, r) = (
                            p1_value(&iter.s, tri, l),
                            p1_value(&iter.i, tri, l),
                            p1_value(&iter.r, tri, l),
                        );
                        let beta = p.beta.eval(p1_value(&iter.c, tri, l));
                        let n = safe_population(s, i, r, p.n_floor);
                        w_s.push(beta * i / n);
                        w_i.push(-(beta * s / n));
                    }
                }
                let field = |values| QuadField {
                    rule: crate::fem::RuleKind::Degree4,
                    n_points: nq,
                    values,
                };
                let (w_s, w_i) = (field(w_s), field(w_i));

                let a_s = disc.scalar_operator(inv_dt + p.eta, p.d_s, Some(&w_s), None)?;
                next.s = self.host[0].solve(&a_s, &rhs_s).map_err(|e| e.in_subsystem("S"))?;

                let a_i = disc.scalar_operator(inv_dt + p.eta + p.gamma, p.d_i, Some(&w_i), None)?;
                next.i = self.host[1].solve(&a_i, &rhs_i).map_err(|e| e.in_subsystem("I"))?;

                let a_r = disc.scalar_operator(inv_dt + p.eta, p.d_r, None, None)?;
                let src = mass.matvec(&iter.i);
                let b_r: Vec<T> = rhs_r.iter().zip(&src).map(|(&a, &b)| a + p.gamma * b).collect();
                next.r = self.host[2].solve(&a_r, &b_r).map_err(|e| e.in_subsystem("R"))?;
            }

            // (3) pathogen: implicit diffusion and decay, explicit advection
            if !opts.pathogen_frozen {
                let extra = if opts.artificial_diffusion && opts.fluid_enabled {
                    Some(disc.artificial_diffusion(&next.u))
                } else {
                    None
                };
                let mut a_c = disc.scalar_operator(inv_dt + p.lambda, p.d_c, None, extra.as_deref())?;
                let shed = mass.matvec(&next.i);
                let mut b_c: Vec<T> = rhs_c.iter().zip(&shed).map(|(&a, &b)| a + p.alpha * b).collect();
                if next.u.iter().any(|&v| v != T::zero()) {
                    let adv = disc.convection_load(&next.u, &iter.c);
                    b_c.iter_mut().zip(&adv).for_each(|(b, &a)| *b -= a);
                }
                let fixed = disc.boundary_vertices();
                crate::fem::apply_dirichlet(
                    &mut a_c,
                    &mut b_c,
                    fixed,
                    &vec![T::zero(); fixed.len()],
                    crate::fem::DirichletMode::RowReplace,
                )?;
                next.c = self.pathogen.solve(&a_c, &b_c).map_err(|e| e.in_subsystem("C"))?;
            }

            // (4) relative update over all six fields
            let update = iter
                .fields()
                .iter()
                .zip(next.fields().iter())
                .map(|(old, new)| {
                    let diff: Vec<T> = old.iter().zip(new.iter()).map(|(&a, &b)| b - a).collect();
                    (norm2(&diff) / norm2(old).max(T::lit(1e-14))).as_f64()
                })
                .fold(0.0, f64::max);
            report.picard_iterations += 1;
            report.last_update = update;
            iter = next;
            if !iter.is_finite() {
                return Err(Error::invalid("non-finite values after Picard iteration"));
            }
            if update < self.controls.picard_tol.as_f64() {
                report.converged = true;
                break;
            }
        }
        if self.controls.picard_mode == PicardMode::SingleSweep {
            report.converged = true;
        }
        if opts.clip_negative {
            for f in [&mut iter.s, &mut iter.i, &mut iter.r, &mut iter.c] {
                f.iter_mut().for_each(|v| *v = v.max(T::zero()));
            }
        }
        Ok((iter, report))
    }

    /// Steps from `initial` until `t_final`, recording monitors and
    /// snapshots at the configured cadence. `observer` sees every recorded
    /// state; returning an error aborts the run.
    pub fn run_with(
        &mut self,
        initial: &State<T>,
        t_final: T,
        monitors: MonitorConfig,
        mut observer: impl FnMut(&State<T>, &MonitorRecord, bool) -> Result<()>,
    ) -> Result<Trajectory<T>> {
        if !(t_final >= initial.t) {
            return Err(Error::invalid("final time precedes the initial state"));
        }
        if monitors.monitor_every == 0 || monitors.snapshot_every == 0 {
            return Err(Error::invalid("cadences must be at least 1"));
        }
        let dt = self.controls.dt;
        let steps = ((t_final - initial.t) / dt - T::lit(1e-9)).ceil().max(T::zero()).as_f64() as usize;
        let mut traj = Trajectory {
            monitors: Vec::new(),
            snapshots: Vec::new(),
            reports: Vec::with_capacity(steps),
            last: initial.clone(),
        };
        let first = monitor_row(&self.disc, initial, 0);
        observer(initial, &first, true)?;
        traj.monitors.push(first);
        traj.snapshots.push(initial.clone());
        let mut state = initial.clone();
        for k in 1..=steps {
            let (mut next, report) = self.step(&state).map_err(|e| Error::Step {
                index: k,
                source: Box::new(e),
            })?;
            // accumulate time from the step count to avoid drift
            next.t = initial.t + T::from_count(k) * dt;
            traj.reports.push(report);
            let last = k == steps;
            let snap = k % monitors.snapshot_every == 0 || last;
            if k % monitors.monitor_every == 0 || last {
                let row = monitor_row(&self.disc, &next, report.picard_iterations);
                observer(&next, &row, snap)?;
                traj.monitors.push(row);
            }
            if snap {
                traj.snapshots.push(next.clone());
            }
            state = next;
        }
        traj.last = state;
        Ok(traj)
    }

    pub fn run(&mut self, initial: &State<T>, t_final: T, monitors: MonitorConfig) -> Result<Trajectory<T>> {
        self.run_with(initial, t_final, monitors, |_, _, _| Ok(()))
    }
}

/// One step without keeping factorisations (convenience wrapper).
pub fn step<T: Real>(
    disc: &Arc<Discretization<T>>,
    state: &State<T>,
    params: &ModelParams<T>,
    controls: &StepControls<T>,
    options: &SchemeOptions,
) -> Result<(State<T>, StepReport)> {
    Stepper::new(Arc::clone(disc), params.clone(), *controls, *options)?.step(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::TriMesh;
    use crate::model::{initial_state, InitialData};

    fn disc(n: usize) -> Arc<Discretization<f64>> {
        Arc::new(Discretization::new(TriMesh::unit_square(n, n).unwrap()).unwrap())
    }

    #[test]
    fn zero_state_is_fixed_point() {
        let d = disc(4);
        let params = ModelParams {
            birth: 0.0,
            ..Default::default()
        };
        let s0 = State::zeros(&d);
        let (s1, rep) = step(&d, &s0, &params, &StepControls::default(), &SchemeOptions::default()).unwrap();
        assert!(rep.converged);
        for f in s1.fields() {
            assert!(f.iter().all(|&v| v == 0.0));
        }
        assert!((s1.t - 0.01).abs() < 1e-15);
    }

    #[test]
    fn bad_controls_rejected() {
        let d = disc(2);
        let c = StepControls {
            dt: -1.0,
            ..Default::default()
        };
        assert!(Stepper::new(d, ModelParams::default(), c, SchemeOptions::default()).is_err());
    }

    #[test]
    fn uniform_state_matches_scalar_backward_euler() {
        let d = disc(4);
        let params = ModelParams {
            alpha: 0.0,
            ..Default::default()
        };
        let init = initial_state(
            &InitialData::Uniform {
                s: 0.9,
                i: 0.1,
                r: 0.0,
                c: 0.0,
            },
            &d,
        )
        .unwrap();
        let opts = SchemeOptions {
            fluid_enabled: false,
            ..Default::default()
        };
        let (s1, rep) = step(&d, &init, &params, &StepControls::default(), &opts).unwrap();
        assert!(rep.converged);
        // scalar oracle: backward Euler by Newton on the 3-variable system
        let (b, g, e, l, dt) = (0.3, 0.4, 0.05, 0.4, 0.01);
        let (s0, i0, r0) = (0.9, 0.1, 0.0);
        let (mut s, mut i, mut r) = (s0, i0, r0);
        for _ in 0..50 {
            let n = s + i + r;
            let f = [
                s - s0 - dt * (l - b * s * i / n - e * s),
                i - i0 - dt * (b * s * i / n - (g + e) * i),
                r - r0 - dt * (g * i - e * r),
            ];
            // Jacobian by central differences is enough here
            let h = 1e-7;
            let eval = |s: f64, i: f64, r: f64| {
                let n = s + i + r;
                [
                    s - s0 - dt * (l - b * s * i / n - e * s),
                    i - i0 - dt * (b * s * i / n - (g + e) * i),
                    r - r0 - dt * (g * i - e * r),
                ]
            };
            let mut j = [[0.0; 3]; 3];
            for k in 0..3 {
                let mut xp = [s, i, r];
                let mut xm = [s, i, r];
                xp[k] += h;
                xm[k] -= h;
                let (fp, fm) = (eval(xp[0], xp[1], xp[2]), eval(xm[0], xm[1], xm[2]));
                for q in 0..3 {
                    j[q][k] = (fp[q] - fm[q]) / (2.0 * h);
                }
            }
            let dx = crate::sparse::solve_direct(
                &crate::sparse::csr_from_triplets(
                    &(0..9).map(|k| (k / 3, k % 3, j[k / 3][k % 3])).collect::<Vec<_>>(),
                    (3, 3),
                )
                .unwrap(),
                &f,
            )
            .unwrap();
            s -= dx[0];
            i -= dx[1];
            r -= dx[2];
        }
        for v in 0..d.n_scalar() {
            assert!((s1.s[v] - s).abs() < 1e-9, "{} vs {s}", s1.s[v]);
            assert!((s1.i[v] - i).abs() < 1e-9);
            assert!((s1.r[v] - r).abs() < 1e-9);
        }
    }

    #[test]
    fn stokes_energy_decays() {
        let d = disc(6);
        let mut init = initial_state(&InitialData::Standard, &d).unwrap();
        init.c.iter_mut().for_each(|v| *v = 0.0);
        let params = ModelParams {
            alpha: 0.0,
            ..Default::default()
        };
        let opts = SchemeOptions {
            momentum_convection: false,
            sir_frozen: true,
            pathogen_frozen: true,
            ..Default::default()
        };
        let mut st = Stepper::new(d.clone(), params, StepControls::default(), opts).unwrap();
        let mut s = init;
        let mut prev = crate::fem::velocity_errors(d.mesh(), &s.u, |_, _| [0.0; 2], |_, _| [[0.0; 2]; 2]).l2;
        for _ in 0..5 {
            let (n, rep) = st.step(&s).unwrap();
            assert!(rep.divergence < 1e-8);
            let e = crate::fem::velocity_errors(d.mesh(), &n.u, |_, _| [0.0; 2], |_, _| [[0.0; 2]; 2]).l2;
            assert!(e <= prev * (1.0 + 1e-12), "{e} > {prev}");
            prev = e;
            s = n;
        }
    }

    #[test]
    fn run_counts_steps_and_rows() {
        let d = disc(3);
        let init = initial_state(&InitialData::Standard, &d).unwrap();
        let opts = SchemeOptions {
            fluid_enabled: false,
            ..Default::default()
        };
        let mut st = Stepper::new(d, ModelParams::default(), StepControls::default(), opts).unwrap();
        let tr = st.run(&init, 0.0, MonitorConfig::default()).unwrap();
        assert_eq!(tr.monitors.len(), 1);
        assert_eq!(tr.snapshots.len(), 1);
        let tr = st
            .run(
                &init,
                0.1,
                MonitorConfig {
                    monitor_every: 1,
                    snapshot_every: 4,
                },
            )
            .unwrap();
        assert_eq!(tr.reports.len(), 10);
        assert_eq!(tr.monitors.len(), 11);
        assert_eq!(tr.snapshots.len(), 4); // t = 0, 0.04, 0.08, 0.1
        assert!((tr.last.t - 0.1).abs() < 1e-14);
    }
}

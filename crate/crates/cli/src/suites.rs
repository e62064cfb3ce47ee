//! Verification suites behind `sirpns verify`.

use anyhow::Result;
use sirpns::io::{experiment_preset, ExperimentId};
use sirpns::verify::{
    homogeneous_limit_deviation, mms_scalar_study, mms_stokes_study, MonitorRecord, OdeState, ScalarMms, StokesMms,
};
use sirpns::Params;

const ODE_TOL: f64 = 1e-3;

fn report(name: &str, ok: bool, detail: String) -> bool {
    println!("[{}] {name}: {detail}", if ok { "pass" } else { "FAIL" });
    ok
}

/// Spatial means against RK4 for uniform data (16×16, T = 40).
pub fn ode() -> Result<bool> {
    let y0 = OdeState { t: 0.0, s: 0.9, i: 0.1, r: 0.0 };
    let p = Params::default();
    let coarse = homogeneous_limit_deviation(&p, y0, 16, 0.01, 40.0)?;
    let fine = homogeneous_limit_deviation(&p, y0, 16, 0.005, 40.0)?;
    println!("dt = 0.01:  S {:.3e}  I {:.3e}  R {:.3e}", coarse.s, coarse.i, coarse.r);
    println!("dt = 0.005: S {:.3e}  I {:.3e}  R {:.3e}", fine.s, fine.i, fine.r);
    let ratio = coarse.max() / fine.max();
    let a = report(
        "deviation",
        coarse.max() <= ODE_TOL,
        format!("{:.3e} (limit {ODE_TOL:.0e})", coarse.max()),
    );
    let b = report(
        "first order in dt",
        (1.5..=2.5).contains(&ratio),
        format!("halving ratio {ratio:.3}"),
    );
    Ok(a && b)
}

pub fn mms() -> Result<bool> {
    let sizes = [16, 32, 64];
    let mut ok = true;
    for (name, mms) in [
        ("scalar, steady", ScalarMms::steady_sine(0.1)),
        ("scalar, transient vortex", ScalarMms::decaying_vortex()),
    ] {
        let t = mms_scalar_study(&mms, &sizes)?;
        println!("{name}\n{}", t.to_text());
        let r = t.min_rate(0).unwrap_or(f64::NAN);
        ok &= report(name, r >= 1.9, format!("L2 rate {r:.3}"));
    }
    for (name, mms) in [
        ("Stokes, constant viscosity", StokesMms::vortex(1.0)),
        ("Stokes, variable viscosity", StokesMms::vortex_variable_nu()),
    ] {
        let t = mms_stokes_study(&mms, &sizes)?;
        println!("{name}\n{}", t.to_text());
        let (h1, p) = (t.min_rate(1).unwrap_or(f64::NAN), t.min_rate(2).unwrap_or(f64::NAN));
        ok &= report(name, h1 >= 0.9 && p >= 0.9, format!("velocity H1 rate {h1:.3}, pressure L2 rate {p:.3}"));
    }
    Ok(ok)
}

fn population_defect(m: &[MonitorRecord], p: &Params, dt: f64) -> f64 {
    m.windows(2)
        .map(|w| {
            let d = w[1].int_n - w[0].int_n - dt * (p.birth - p.eta * w[1].int_n);
            d.abs() / w[0].int_n
        })
        .fold(0.0, f64::max)
}

/// Shortened runs (16×16, T = 2) of the reference experiments.
pub fn invariants() -> Result<bool> {
    let mut ok = true;
    for id in [ExperimentId::Exp1, ExperimentId::Exp2, ExperimentId::Exp3, ExperimentId::Exp4] {
        let mut cfg = experiment_preset(id);
        cfg.nx = 16;
        cfg.ny = 16;
        cfg.t_final = 2.0;
        let traj = cfg.simulate()?;
        let m = &traj.monitors;
        let min = m
            .iter()
            .map(|r| r.min_s.min(r.min_i).min(r.min_r).min(r.min_c))
            .fold(f64::INFINITY, f64::min);
        ok &= report(&format!("{id} positivity"), min >= -1e-8, format!("min nodal value {min:.3e}"));
        if !cfg.options.fluid_enabled {
            let d = population_defect(m, &cfg.params, cfg.controls.dt);
            ok &= report(&format!("{id} population balance"), d <= 1e-6, format!("max relative defect {d:.3e}"));
        } else {
            // the interpolated initial flow is not discretely solenoidal
            let div = m[1..]
                .iter()
                .map(|r| r.div_res / r.max_u.max(1.0))
                .fold(0.0, f64::max);
            ok &= report(&format!("{id} incompressibility"), div <= 1e-8, format!("max |BU| {div:.3e}"));
        }
        let unconverged = traj.reports.iter().filter(|r| !r.converged).count();
        ok &= report(&format!("{id} Picard convergence"), unconverged == 0, format!("{unconverged} unconverged steps"));
    }
    Ok(ok)
}

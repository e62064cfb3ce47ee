//! Line-oriented run configuration.
//!
//! ```text
//! # comment
//! experiment = exp3
//! [mesh]
//! nx = 32
//! ny = 32
//! [model]
//! alpha = 0.6
//! ```
//!
//! Every key has a home section but names are globally unique, so a key may
//! also appear before the first header. Missing keys take the experiment
//! preset's value.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use crate::model::{CoefficientFn, Forcing, InitialData, ModelParams, DEFAULT_BETA0, DEFAULT_NU0};
use crate::sparse::SolverKind;
use crate::timestepper::{MonitorConfig, PicardMode, SchemeOptions, StepControls};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExperimentId {
    /// Diffusion-driven SIR dynamics: constant `β`, no shedding, no flow.
    #[default]
    Exp1,
    /// `β = β₀ + C`, no flow.
    Exp2,
    /// Full coupling with constant viscosity.
    Exp3,
    /// Full coupling with `ν = ν₀ + C`.
    Exp4,
    /// Pathogen transport by the flow with frozen hosts.
    PathogenOnly,
    Custom,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::Exp1,
        ExperimentId::Exp2,
        ExperimentId::Exp3,
        ExperimentId::Exp4,
        ExperimentId::PathogenOnly,
        ExperimentId::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::Exp1 => "exp1",
            ExperimentId::Exp2 => "exp2",
            ExperimentId::Exp3 => "exp3",
            ExperimentId::Exp4 => "exp4",
            ExperimentId::PathogenOnly => "pathogen_only",
            ExperimentId::Custom => "custom",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::ConfigValue(format!("unknown experiment `{s}`")))
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentId,
    pub nx: usize,
    pub ny: usize,
    pub t_final: f64,
    pub controls: StepControls<f64>,
    pub params: ModelParams<f64>,
    pub initial: InitialData<f64>,
    pub options: SchemeOptions,
    pub out_dir: PathBuf,
    pub monitors: MonitorConfig,
    /// Fixed assembly and reduction order. The solver is single-threaded, so
    /// both settings currently give identical output.
    pub deterministic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        experiment_preset(ExperimentId::Exp1)
    }
}

/// The reference experiments on a 32×32 mesh with `Δt = 0.01`, `T = 40`.
pub fn experiment_preset(id: ExperimentId) -> RunConfig {
    let base = ModelParams::<f64>::default();
    let beta_c = CoefficientFn::Affine { c0: DEFAULT_BETA0 };
    let (params, options) = match id {
        ExperimentId::Exp1 | ExperimentId::Custom => (
            ModelParams { alpha: 0.0, ..base },
            SchemeOptions {
                fluid_enabled: false,
                ..Default::default()
            },
        ),
        ExperimentId::Exp2 => (
            ModelParams { beta: beta_c, ..base },
            SchemeOptions {
                fluid_enabled: false,
                ..Default::default()
            },
        ),
        ExperimentId::Exp3 => (ModelParams { beta: beta_c, ..base }, SchemeOptions::default()),
        ExperimentId::Exp4 => (
            ModelParams {
                beta: beta_c,
                nu: CoefficientFn::Affine { c0: DEFAULT_NU0 },
                ..base
            },
            SchemeOptions::default(),
        ),
        ExperimentId::PathogenOnly => (
            ModelParams { alpha: 0.0, ..base },
            SchemeOptions {
                sir_frozen: true,
                ..Default::default()
            },
        ),
    };
    RunConfig {
        experiment: id,
        nx: 32,
        ny: 32,
        t_final: 40.0,
        controls: StepControls::default(),
        params,
        initial: InitialData::Standard,
        options,
        out_dir: PathBuf::from("out"),
        monitors: MonitorConfig::default(),
        deterministic: true,
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::ConfigValue("mesh needs at least one cell per axis".into()));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::ConfigValue("t_final must be positive".into()));
        }
        if !(self.controls.dt > 0.0) || !self.controls.dt.is_finite() {
            return Err(Error::ConfigValue("dt must be positive".into()));
        }
        if !(self.controls.picard_tol > 0.0) {
            return Err(Error::ConfigValue("picard_tol must be positive".into()));
        }
        if self.controls.picard_max == 0 {
            return Err(Error::ConfigValue("picard_max must be at least 1".into()));
        }
        if self.monitors.monitor_every == 0 || self.monitors.snapshot_every == 0 {
            return Err(Error::ConfigValue("cadences must be at least 1".into()));
        }
        if let Some(v) = self.params.validate().into_iter().find(|v| v.severity == crate::model::Severity::Fatal) {
            return Err(Error::ConfigValue(v.message));
        }
        Ok(())
    }

    /// Number of time steps to reach `t_final`.
    pub fn steps(&self) -> usize {
        (self.t_final / self.controls.dt - 1e-9).ceil().max(0.0) as usize
    }

    /// Text form accepted by [`parse_config`]. Fails for custom forcing or
    /// initial data, which have no textual form.
    pub fn to_config_string(&self) -> Result<String> {
        let mut out = String::new();
        let p = &self.params;
        let w = &mut out;
        let _ = writeln!(w, "[run]");
        let _ = writeln!(w, "experiment = {}", self.experiment);
        let _ = writeln!(w, "out_dir = {}", self.out_dir.display());
        let _ = writeln!(w, "deterministic = {}", self.deterministic);
        let _ = writeln!(w, "monitor_every = {}", self.monitors.monitor_every);
        let _ = writeln!(w, "snapshot_every = {}", self.monitors.snapshot_every);
        let _ = writeln!(w, "\n[mesh]\nnx = {}\nny = {}", self.nx, self.ny);
        let _ = writeln!(w, "\n[time]");
        let _ = writeln!(w, "dt = {:?}", self.controls.dt);
        let _ = writeln!(w, "t_final = {:?}", self.t_final);
        let mode = match self.controls.picard_mode {
            PicardMode::SingleSweep => "single_sweep",
            PicardMode::ToConvergence => "to_convergence",
        };
        let _ = writeln!(w, "picard_mode = {mode}");
        let _ = writeln!(w, "picard_tol = {:?}", self.controls.picard_tol);
        let _ = writeln!(w, "picard_max = {}", self.controls.picard_max);
        let _ = writeln!(w, "\n[model]");
        for (k, v) in [
            ("d_s", p.d_s),
            ("d_i", p.d_i),
            ("d_r", p.d_r),
            ("d_c", p.d_c),
            ("alpha", p.alpha),
            ("gamma", p.gamma),
            ("lambda", p.lambda),
            ("eta", p.eta),
            ("birth", p.birth),
            ("n_floor", p.n_floor),
        ] {
            let _ = writeln!(w, "{k} = {v:?}");
        }
        write_coefficient(w, "beta", &p.beta);
        write_coefficient(w, "nu", &p.nu);
        match &p.forcing {
            Forcing::Zero => {}
            Forcing::Constant(f) => {
                let _ = writeln!(w, "forcing_x = {:?}\nforcing_y = {:?}", f[0], f[1]);
            }
            Forcing::Custom(_) => return Err(Error::ConfigValue("custom forcing has no text form".into())),
        }
        let _ = writeln!(w, "\n[initial]");
        match &self.initial {
            InitialData::Standard => {
                let _ = writeln!(w, "initial = standard");
            }
            InitialData::Zero => {
                let _ = writeln!(w, "initial = zero");
            }
            InitialData::Uniform { s, i, r, c } => {
                let _ = writeln!(w, "initial = uniform\ns0 = {s:?}\ni0 = {i:?}\nr0 = {r:?}\nc0 = {c:?}");
            }
            InitialData::Custom(_) => return Err(Error::ConfigValue("custom initial data has no text form".into())),
        }
        let o = &self.options;
        let _ = writeln!(w, "\n[scheme]");
        for (k, v) in [
            ("fluid", o.fluid_enabled),
            ("sir_frozen", o.sir_frozen),
            ("pathogen_frozen", o.pathogen_frozen),
            ("momentum_convection", o.momentum_convection),
            ("artificial_diffusion", o.artificial_diffusion),
            ("clip_negative", o.clip_negative),
        ] {
            let _ = writeln!(w, "{k} = {v}");
        }
        let solver = match o.solver {
            SolverKind::Direct => "direct",
            SolverKind::GmresIlu0 => "gmres_ilu0",
        };
        let _ = writeln!(w, "solver = {solver}");
        Ok(out)
    }
}

fn write_coefficient(w: &mut String, name: &str, c: &CoefficientFn<f64>) {
    match *c {
        CoefficientFn::Constant { c0 } => {
            let _ = writeln!(w, "{name} = constant\n{name}0 = {c0:?}");
        }
        CoefficientFn::Affine { c0 } => {
            let _ = writeln!(w, "{name} = affine\n{name}0 = {c0:?}");
        }
        CoefficientFn::ClampedAffine { c0, lo, hi } => {
            let _ = writeln!(
                w,
                "{name} = clamped\n{name}0 = {c0:?}\n{name}_min = {lo:?}\n{name}_max = {hi:?}"
            );
        }
    }
}

const SECTIONS: [&str; 6] = ["run", "mesh", "time", "model", "initial", "scheme"];

fn home_section(key: &str) -> Option<&'static str> {
    Some(match key {
        "experiment" | "out_dir" | "deterministic" | "monitor_every" | "snapshot_every" => "run",
        "nx" | "ny" => "mesh",
        "dt" | "t_final" | "picard_mode" | "picard_tol" | "picard_max" => "time",
        "d_s" | "d_i" | "d_r" | "d_c" | "alpha" | "gamma" | "lambda" | "eta" | "birth" | "n_floor" | "beta"
        | "beta0" | "beta_min" | "beta_max" | "nu" | "nu0" | "nu_min" | "nu_max" | "forcing_x" | "forcing_y" => {
            "model"
        }
        "initial" | "s0" | "i0" | "r0" | "c0" => "initial",
        "fluid" | "sir_frozen" | "pathogen_frozen" | "momentum_convection" | "artificial_diffusion"
        | "clip_negative" | "solver" => "scheme",
        _ => return None,
    })
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.map.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn get<V: FromStr>(&self, key: &str) -> Result<Option<V>> {
        match self.raw(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|_| Error::Config {
                line,
                message: format!("cannot parse `{v}` as a value for {key}"),
            }),
        }
    }

    fn flag(&self, key: &str) -> Result<Option<bool>> {
        match self.raw(key) {
            None => Ok(None),
            Some((_, "true")) => Ok(Some(true)),
            Some((_, "false")) => Ok(Some(false)),
            Some((line, v)) => Err(Error::Config {
                line,
                message: format!("{key} must be true or false, got `{v}`"),
            }),
        }
    }

    fn set<V: FromStr>(&self, key: &str, target: &mut V) -> Result<()> {
        if let Some(v) = self.get(key)? {
            *target = v;
        }
        Ok(())
    }

    fn set_flag(&self, key: &str, target: &mut bool) -> Result<()> {
        if let Some(v) = self.flag(key)? {
            *target = v;
        }
        Ok(())
    }

    fn line(&self, key: &str) -> usize {
        self.map.get(key).map_or(0, |e| e.0)
    }

    fn positive(&self, key: &str, v: f64) -> Result<()> {
        if self.map.contains_key(key) && !(v > 0.0 && v.is_finite()) {
            return Err(Error::Config {
                line: self.line(key),
                message: format!("{key} must be positive"),
            });
        }
        Ok(())
    }
}

fn coefficient(e: &Entries, name: &str, current: CoefficientFn<f64>) -> Result<CoefficientFn<f64>> {
    let kind: Option<String> = e.get(name)?;
    let base: f64 = e.get(&format!("{name}0"))?.unwrap_or(current.base());
    let (lo_key, hi_key) = (format!("{name}_min"), format!("{name}_max"));
    let kind = kind.unwrap_or_else(|| {
        match current {
            CoefficientFn::Constant { .. } => "constant",
            CoefficientFn::Affine { .. } => "affine",
            CoefficientFn::ClampedAffine { .. } => "clamped",
        }
        .to_string()
    });
    Ok(match kind.as_str() {
        "constant" => CoefficientFn::Constant { c0: base },
        "affine" => CoefficientFn::Affine { c0: base },
        "clamped" => {
            let (lo0, hi0) = match current {
                CoefficientFn::ClampedAffine { lo, hi, .. } => (lo, hi),
                _ => (base, f64::INFINITY),
            };
            CoefficientFn::ClampedAffine {
                c0: base,
                lo: e.get(&lo_key)?.unwrap_or(lo0),
                hi: e.get(&hi_key)?.unwrap_or(hi0),
            }
        }
        other => {
            return Err(Error::Config {
                line: e.line(name),
                message: format!("{name} must be constant, affine or clamped, got `{other}`"),
            })
        }
    })
}

/// Parses the configuration text. Unknown keys are reported together.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, None)
}

/// Like [`parse_config`], but `experiment` (when given) replaces the file's
/// own `experiment` key as the base preset.
pub fn parse_config_with(text: &str, experiment: Option<ExperimentId>) -> Result<RunConfig> {
    let mut map = BTreeMap::new();
    let mut unknown = Vec::new();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| Error::Config {
                line,
                message: format!("malformed section header `{content}`"),
            })?;
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(Error::Config {
                    line,
                    message: format!("unknown section [{name}]"),
                });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(Error::Config {
                line,
                message: "empty key".into(),
            });
        }
        match (home_section(key), section.as_deref()) {
            (None, _) => {
                unknown.push(format!("{key} (line {line})"));
                continue;
            }
            (Some(home), Some(s)) if home != s => {
                unknown.push(format!("{key} in [{s}] (line {line}, belongs to [{home}])"));
                continue;
            }
            _ => {}
        }
        if let Some((first, _)) = map.insert(key.to_string(), (line, value.to_string())) {
            return Err(Error::Config {
                line,
                message: format!("duplicate key {key} (first set on line {first})"),
            });
        }
    }
    if !unknown.is_empty() {
        return Err(Error::ConfigValue(format!("unknown keys: {}", unknown.join(", "))));
    }
    let e = Entries { map };

    let forced = experiment;
    let experiment: ExperimentId = match (forced, e.raw("experiment")) {
        (Some(id), _) => id,
        (None, None) => ExperimentId::Exp1,
        (None, Some((line, v))) => v.parse().map_err(|_| Error::Config {
            line,
            message: format!("unknown experiment `{v}`"),
        })?,
    };
    let mut cfg = experiment_preset(experiment);

    if let Some((_, v)) = e.raw("out_dir") {
        cfg.out_dir = PathBuf::from(v);
    }
    e.set_flag("deterministic", &mut cfg.deterministic)?;
    e.set("monitor_every", &mut cfg.monitors.monitor_every)?;
    e.set("snapshot_every", &mut cfg.monitors.snapshot_every)?;
    for key in ["monitor_every", "snapshot_every", "nx", "ny", "picard_max"] {
        if e.get::<usize>(key)? == Some(0) {
            return Err(Error::Config {
                line: e.line(key),
                message: format!("{key} must be at least 1"),
            });
        }
    }
    e.set("nx", &mut cfg.nx)?;
    e.set("ny", &mut cfg.ny)?;

    e.set("dt", &mut cfg.controls.dt)?;
    e.positive("dt", cfg.controls.dt)?;
    e.set("t_final", &mut cfg.t_final)?;
    e.positive("t_final", cfg.t_final)?;
    if let Some((line, v)) = e.raw("picard_mode") {
        cfg.controls.picard_mode = match v {
            "single_sweep" => PicardMode::SingleSweep,
            "to_convergence" => PicardMode::ToConvergence,
            _ => {
                return Err(Error::Config {
                    line,
                    message: format!("picard_mode must be single_sweep or to_convergence, got `{v}`"),
                })
            }
        };
    }
    e.set("picard_tol", &mut cfg.controls.picard_tol)?;
    e.positive("picard_tol", cfg.controls.picard_tol)?;
    e.set("picard_max", &mut cfg.controls.picard_max)?;

    let p = &mut cfg.params;
    for (key, slot) in [
        ("d_s", &mut p.d_s),
        ("d_i", &mut p.d_i),
        ("d_r", &mut p.d_r),
        ("d_c", &mut p.d_c),
        ("alpha", &mut p.alpha),
        ("gamma", &mut p.gamma),
        ("lambda", &mut p.lambda),
        ("eta", &mut p.eta),
        ("birth", &mut p.birth),
        ("n_floor", &mut p.n_floor),
    ] {
        e.set(key, slot)?;
    }
    p.beta = coefficient(&e, "beta", p.beta)?;
    p.nu = coefficient(&e, "nu", p.nu)?;
    let fx: Option<f64> = e.get("forcing_x")?;
    let fy: Option<f64> = e.get("forcing_y")?;
    if fx.is_some() || fy.is_some() {
        let f = [fx.unwrap_or(0.0), fy.unwrap_or(0.0)];
        p.forcing = Forcing::Constant(f);
    }

    let initial: Option<String> = e.get("initial")?;
    let uniform_keys = ["s0", "i0", "r0", "c0"].iter().any(|k| e.map.contains_key(*k));
    cfg.initial = match initial.as_deref() {
        None if !uniform_keys => cfg.initial,
        Some("standard") if !uniform_keys => InitialData::Standard,
        Some("zero") if !uniform_keys => InitialData::Zero,
        None | Some("uniform") => InitialData::Uniform {
            s: e.get("s0")?.unwrap_or(0.0),
            i: e.get("i0")?.unwrap_or(0.0),
            r: e.get("r0")?.unwrap_or(0.0),
            c: e.get("c0")?.unwrap_or(0.0),
        },
        Some(other) => {
            return Err(Error::Config {
                line: e.line("initial"),
                message: if uniform_keys {
                    format!("s0/i0/r0/c0 need initial = uniform, got `{other}`")
                } else {
                    format!("initial must be standard, uniform or zero, got `{other}`")
                },
            })
        }
    };

    let o = &mut cfg.options;
    e.set_flag("fluid", &mut o.fluid_enabled)?;
    e.set_flag("sir_frozen", &mut o.sir_frozen)?;
    e.set_flag("pathogen_frozen", &mut o.pathogen_frozen)?;
    e.set_flag("momentum_convection", &mut o.momentum_convection)?;
    e.set_flag("artificial_diffusion", &mut o.artificial_diffusion)?;
    e.set_flag("clip_negative", &mut o.clip_negative)?;
    if let Some((line, v)) = e.raw("solver") {
        o.solver = match v {
            "direct" => SolverKind::Direct,
            "gmres_ilu0" => SolverKind::GmresIlu0,
            _ => {
                return Err(Error::Config {
                    line,
                    message: format!("solver must be direct or gmres_ilu0, got `{v}`"),
                })
            }
        };
    }
    if (forced.is_some() || e.map.contains_key("experiment")) && experiment != ExperimentId::Custom && differs_from_preset(&cfg) {
        cfg.experiment = ExperimentId::Custom;
    }
    cfg.validate()?;
    Ok(cfg)
}

// Overriding the model or scheme of a named experiment makes it a custom run.
fn differs_from_preset(cfg: &RunConfig) -> bool {
    let preset = experiment_preset(cfg.experiment);
    cfg.params != preset.params || cfg.options != preset.options
}

//! Driving a configured run to an output directory.

use std::fs::OpenOptions;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::{write_monitor_csv, write_vtk_snapshot, RunConfig};
use crate::fem::Discretization;
use crate::mesh::TriMesh;
use crate::model::initial_state;
use crate::timestepper::{State, Stepper, Trajectory};
use crate::{Error, Result};

pub const LOCK_FILE: &str = ".sirpns.lock";
pub const MONITOR_FILE: &str = "monitor.csv";
pub const CONFIG_FILE: &str = "run.cfg";

/// Exclusive claim on an output directory; released on drop.
#[derive(Debug)]
pub struct RunLock {
    path: PathBuf,
}

impl RunLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Self { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::ConfigValue(format!(
                "{} is in use by another run (remove {} if it is stale)",
                dir.display(),
                path.display()
            ))),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

impl RunConfig {
    pub fn discretization(&self) -> Result<Discretization<f64>> {
        Discretization::new(TriMesh::unit_square(self.nx, self.ny)?)
    }

    /// Stepper and initial state. Without the fluid stage the flow is at rest.
    pub fn build(&self) -> Result<(Stepper<f64>, State<f64>)> {
        self.validate()?;
        let disc = Arc::new(self.discretization()?);
        let mut state = initial_state(&self.initial, &disc)?;
        if !self.options.fluid_enabled {
            state.u.iter_mut().for_each(|v| *v = 0.0);
        }
        let stepper = Stepper::new(disc, self.params.clone(), self.controls, self.options)?;
        Ok((stepper, state))
    }

    /// Runs in memory without writing anything.
    pub fn simulate(&self) -> Result<Trajectory<f64>> {
        let (mut stepper, state) = self.build()?;
        stepper.run(&state, self.t_final, self.monitors)
    }
}

/// Files produced by [`run_to_directory`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub steps: usize,
    pub monitor_csv: PathBuf,
    pub snapshots: Vec<PathBuf>,
    pub trajectory: Trajectory<f64>,
}

/// Runs `cfg` and writes `monitor.csv`, `snapshot_NNNNNN.vtk` files and a
/// copy of the configuration into `out`.
pub fn run_to_directory(cfg: &RunConfig, out: &Path) -> Result<RunOutput> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let _lock = RunLock::acquire(out)?;
    if let Ok(text) = cfg.to_config_string() {
        let p = out.join(CONFIG_FILE);
        std::fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
    }
    let (mut stepper, state) = cfg.build()?;
    let disc = Arc::clone(stepper.discretization());
    let mut snapshots = Vec::new();
    let trajectory = stepper.run_with(&state, cfg.t_final, cfg.monitors, |s, _, snap| {
        if snap {
            let p = out.join(format!("snapshot_{:06}.vtk", s.step));
            write_vtk_snapshot(s, disc.mesh(), &p)?;
            snapshots.push(p);
        }
        Ok(())
    })?;
    let monitor_csv = out.join(MONITOR_FILE);
    write_monitor_csv(&trajectory.monitors, &monitor_csv)?;
    Ok(RunOutput {
        steps: trajectory.reports.len(),
        monitor_csv,
        snapshots,
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{experiment_preset, read_vtk_snapshot, ExperimentId};

    fn small(id: ExperimentId) -> RunConfig {
        let mut c = experiment_preset(id);
        c.nx = 4;
        c.ny = 4;
        c.t_final = 0.05;
        c.monitors.snapshot_every = 2;
        c
    }

    #[test]
    fn writes_monitors_and_snapshots() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_to_directory(&small(ExperimentId::Exp3), dir.path()).unwrap();
        assert_eq!(out.steps, 5);
        let csv = std::fs::read_to_string(&out.monitor_csv).unwrap();
        assert_eq!(csv.lines().count(), 1 + 6);
        // t = 0, 2, 4 and the final step
        assert_eq!(out.snapshots.len(), 4);
        assert!(read_vtk_snapshot(&out.snapshots[0]).is_ok());
        assert!(dir.path().join(CONFIG_FILE).exists());
        assert!(!dir.path().join(LOCK_FILE).exists());
    }

    #[test]
    fn repeated_runs_are_byte_identical() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let cfg = small(ExperimentId::Exp4);
        let ra = run_to_directory(&cfg, a.path()).unwrap();
        let rb = run_to_directory(&cfg, b.path()).unwrap();
        let files = std::iter::once((&ra.monitor_csv, &rb.monitor_csv)).chain(ra.snapshots.iter().zip(&rb.snapshots));
        for (x, y) in files {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{}", x.display());
        }
    }

    #[test]
    fn a_locked_directory_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let lock = RunLock::acquire(dir.path()).unwrap();
        assert!(run_to_directory(&small(ExperimentId::Exp1), dir.path()).is_err());
        drop(lock);
        assert!(run_to_directory(&small(ExperimentId::Exp1), dir.path()).is_ok());
    }

    #[test]
    fn fluid_free_runs_start_at_rest() {
        let (_, s) = small(ExperimentId::Exp1).build().unwrap();
        assert!(s.u.iter().all(|&v| v == 0.0));
        let (_, s) = small(ExperimentId::Exp3).build().unwrap();
        assert!(s.u.iter().any(|&v| v != 0.0));
    }
}

//! Configuration, experiment presets and file output.

mod config;
mod csv;
mod run;
mod vtk;

pub use config::{experiment_preset, parse_config, parse_config_with, ExperimentId, RunConfig};
pub use csv::{monitor_csv, read_monitor_csv, write_monitor_csv, MONITOR_HEADER};
pub use run::{run_to_directory, RunLock, RunOutput, CONFIG_FILE, LOCK_FILE, MONITOR_FILE};
pub use vtk::{read_vtk_snapshot, write_vtk_snapshot, VtkSnapshot};

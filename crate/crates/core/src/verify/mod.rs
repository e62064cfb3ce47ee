//! Independent oracles and convergence studies.

mod mms;
mod monitor;
mod ode;
mod table;

pub use mms::{mms_scalar_study, mms_stokes_study, ScalarMms, StokesMms};
pub use monitor::{monitor_row, MonitorRecord};
pub use ode::{compare_pde_to_ode, homogeneous_limit_deviation, sir_ode_oracle, sir_rhs, OdeDeviation, OdeState};
pub use table::{ConvergenceRow, ConvergenceTable};

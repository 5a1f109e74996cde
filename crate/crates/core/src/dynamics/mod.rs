//! Time evolution: exact unitary propagation, Lindblad integration and
//! quantum-jump trajectories.

mod grid;
mod linalg;
mod master;
mod mcwf;
mod series;
mod unitary;

pub use grid::{max_frequency, TimeGrid, STEP_SAFETY};
pub use master::{evolve_master, liouvillian, MasterRun, POSITIVITY_TOL, TRACE_TOL};
pub use mcwf::{mcwf_ensemble, mcwf_trajectory, EnsembleRun, TICK_LEVELS};
pub use series::{format_number, Column, Observable, TimeSeries, TrajectoryRecord};
pub use unitary::{evolve_unitary, UnitaryRun, NORM_TOL};

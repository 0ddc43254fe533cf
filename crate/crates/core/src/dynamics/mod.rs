//! Metropolis Monte Carlo evolution of a chain.
//!
//! One sweep proposes one single-site move per site. Time is measured in
//! sweeps; the trial radius is tuned during thermalisation and then frozen
//! so that a sweep is a fixed clock during measurement.

mod checkpoint;
mod config;
mod drift;
mod engine;
mod init;
mod trajectory;

pub use checkpoint::Checkpoint;
pub use config::{DynamicsConfig, MoveDistribution};
pub use drift::{metropolis_drift_diagnostic, DriftSample};
pub use engine::{metropolis_accept, Simulation};
pub use init::{initial_conformation, InitStyle};
pub use trajectory::{run_trajectory, run_with_sink, RunSummary, SnapshotSink, Trajectory, TrajectoryRecorder};

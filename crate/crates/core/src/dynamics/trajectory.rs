use serde::{Deserialize, Serialize};

use super::{DynamicsConfig, Simulation};
use crate::error::Result;
use crate::model::{Conformation, EnergyBreakdown, Hamiltonian, ModelParams, NoiseMatrix};

/// Receives every recorded snapshot of a measurement run.
pub trait SnapshotSink {
    /// `mc_time` counts sweeps from the start of measurement (`0` is the
    /// thermalised starting configuration).
    fn record(&mut self, mc_time: u64, conf: &Conformation, ham: &Hamiltonian) -> Result<()>;
}

impl<S: SnapshotSink + ?Sized> SnapshotSink for &mut S {
    fn record(&mut self, mc_time: u64, conf: &Conformation, ham: &Hamiltonian) -> Result<()> {
        (**self).record(mc_time, conf, ham)
    }
}

impl<A: SnapshotSink, B: SnapshotSink> SnapshotSink for (A, B) {
    fn record(&mut self, mc_time: u64, conf: &Conformation, ham: &Hamiltonian) -> Result<()> {
        self.0.record(mc_time, conf, ham)?;
        self.1.record(mc_time, conf, ham)
    }
}

/// Stored snapshots plus the energy series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub snapshots: Vec<(u64, Conformation)>,
    pub energy_series: Vec<(u64, EnergyBreakdown)>,
    /// Acceptance rate over the measurement phase.
    pub acceptance_rate: f64,
    /// Frozen trial radius used during measurement.
    pub trial_radius: f64,
    pub record_stride: u64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// A trajectory that never moves: `len` copies of `conf`.
    pub fn frozen(conf: &Conformation, ham: &Hamiltonian, len: usize, stride: u64) -> Result<Self> {
        let e = ham.breakdown(conf)?;
        Ok(Trajectory {
            snapshots: (0..len).map(|k| (k as u64 * stride, conf.clone())).collect(),
            energy_series: (0..len).map(|k| (k as u64 * stride, e)).collect(),
            acceptance_rate: 0.0,
            trial_radius: 0.0,
            record_stride: stride,
        })
    }
}

/// Sink that keeps every snapshot and its energy breakdown in memory.
#[derive(Debug, Default)]
pub struct TrajectoryRecorder {
    pub snapshots: Vec<(u64, Conformation)>,
    pub energy_series: Vec<(u64, EnergyBreakdown)>,
}

impl SnapshotSink for TrajectoryRecorder {
    fn record(&mut self, mc_time: u64, conf: &Conformation, ham: &Hamiltonian) -> Result<()> {
        self.energy_series.push((mc_time, ham.breakdown(conf)?));
        self.snapshots.push((mc_time, conf.clone()));
        Ok(())
    }
}

/// Outcome of [`run_with_sink`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub thermalize_sweeps: u64,
    pub acceptance_rate: f64,
    pub trial_radius: f64,
}

/// Thermalises `sim`, then measures for `config.sweeps_measure` sweeps,
/// handing a snapshot to `sink` at `t = 0` and every `record_stride` sweeps.
pub fn run_with_sink<S: SnapshotSink>(sim: &mut Simulation, mut sink: S) -> Result<RunSummary> {
    let cfg = sim.config().clone();
    let params = sim.params().clone();
    let therm = cfg.thermalize_sweeps(params.n_sites, params.h, params.beta);
    let last_block = sim.thermalize(therm);
    if therm >= 100 {
        sim.check_acceptance(last_block)?;
    }
    sim.reset_counters();
    let start = sim.mc_time();
    let total = cfg.measured_sweeps();
    sink.record(0, sim.conformation(), sim.hamiltonian())?;
    let mut t = 0;
    while t < total {
        sim.run_sweeps(cfg.record_stride);
        t += cfg.record_stride;
        debug_assert_eq!(sim.mc_time() - start, t);
        sink.record(t, sim.conformation(), sim.hamiltonian())?;
    }
    let rate = sim.acceptance_rate();
    sim.check_acceptance(rate)?;
    Ok(RunSummary {
        thermalize_sweeps: therm,
        acceptance_rate: rate,
        trial_radius: sim.trial_radius(),
    })
}

/// Thermalise and record a full trajectory in memory.
pub fn run_trajectory(
    initial: Conformation,
    params: &ModelParams,
    noise: &NoiseMatrix,
    config: &DynamicsConfig,
) -> Result<Trajectory> {
    let mut sim = Simulation::new(initial, params, noise, config)?;
    let mut rec = TrajectoryRecorder::default();
    let summary = run_with_sink(&mut sim, &mut rec)?;
    Ok(Trajectory {
        snapshots: rec.snapshots,
        energy_series: rec.energy_series,
        acceptance_rate: summary.acceptance_rate,
        trial_radius: summary.trial_radius,
        record_stride: config.record_stride,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{initial_conformation, InitStyle};
    use crate::Error;

    #[test]
    fn snapshot_count_includes_origin() {
        let p = ModelParams::harmonic(6, 1.0, 1.0);
        let cfg = DynamicsConfig {
            sweeps_thermalize: Some(0),
            sweeps_measure: 100,
            record_stride: 10,
            trial_radius: 1.0,
            ..Default::default()
        };
        let init = initial_conformation(&p, InitStyle::StraightLine, 0).unwrap();
        let traj = run_trajectory(init, &p, &NoiseMatrix::zeros(6), &cfg).unwrap();
        assert_eq!(traj.len(), 11);
        let times: Vec<u64> = traj.snapshots.iter().map(|(t, _)| *t).collect();
        assert_eq!(times, (0..=10).map(|k| 10 * k).collect::<Vec<_>>());
        assert!(times.windows(2).all(|w| w[0] < w[1]));
        assert!((0.0..=1.0).contains(&traj.acceptance_rate));
    }

    #[test]
    fn mis_tuned_radius_aborts() {
        let p = ModelParams::new(6, 1.0, 2.7, 2.0, 0.0, 1.0);
        let cfg = DynamicsConfig {
            sweeps_thermalize: Some(0),
            sweeps_measure: 200,
            trial_radius: 50.0,
            tune_trial_radius: false,
            ..Default::default()
        };
        let init = initial_conformation(&p, InitStyle::StraightLine, 0).unwrap();
        let r = run_trajectory(init, &p, &NoiseMatrix::zeros(6), &cfg);
        assert!(matches!(r, Err(Error::AcceptanceOutOfRange { .. })));
    }

    #[test]
    fn deterministic_trajectory() {
        let p = ModelParams::new(8, 1.0, 2.7, 2.0, 6.0, 1.0);
        let noise = crate::model::generate_noise(8, 2, Default::default()).unwrap();
        let cfg = DynamicsConfig {
            sweeps_thermalize: Some(500),
            sweeps_measure: 300,
            record_stride: 7,
            rng_seed: 42,
            ..Default::default()
        };
        let init = initial_conformation(&p, InitStyle::RandomCoil, 3).unwrap();
        let a = run_trajectory(init.clone(), &p, &noise, &cfg).unwrap();
        let b = run_trajectory(init, &p, &noise, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 300 / 7 + 1);
    }
}

use serde::{Deserialize, Serialize};

use crate::dynamics::{SnapshotSink, Trajectory};
use crate::error::{Error, Result};
use crate::model::{Conformation, Hamiltonian};
use crate::stats::Estimate;

/// Time averages of static shape and energy observables for one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureSample {
    pub energy: f64,
    pub bond_sq: f64,
    pub end_to_end_sq: f64,
    pub gyration_sq: f64,
    pub frames: u64,
}

impl StructureSample {
    pub fn from_trajectory(tr: &Trajectory, ham: &Hamiltonian) -> Result<Self> {
        let mut acc = StructureAccumulator::new(1);
        for (t, c) in &tr.snapshots {
            acc.record(*t, c, ham)?;
        }
        acc.finish()
    }
}

fn gyration_sq(conf: &Conformation) -> f64 {
    let com = conf.center_of_mass();
    conf.positions().iter().map(|p| (p - com).norm_squared()).sum::<f64>() / conf.n_sites() as f64
}

/// Streaming time average over every `every`-th recorded snapshot.
#[derive(Debug, Clone)]
pub struct StructureAccumulator {
    every: u64,
    seen: u64,
    sums: [f64; 4],
    frames: u64,
}

impl StructureAccumulator {
    pub fn new(every: u64) -> Self {
        StructureAccumulator { every: every.max(1), seen: 0, sums: [0.0; 4], frames: 0 }
    }

    pub fn finish(&self) -> Result<StructureSample> {
        if self.frames == 0 {
            return Err(Error::InsufficientSamples { found: 0, needed: 1 });
        }
        let f = self.frames as f64;
        Ok(StructureSample {
            energy: self.sums[0] / f,
            bond_sq: self.sums[1] / f,
            end_to_end_sq: self.sums[2] / f,
            gyration_sq: self.sums[3] / f,
            frames: self.frames,
        })
    }
}

impl SnapshotSink for StructureAccumulator {
    fn record(&mut self, _mc_time: u64, conf: &Conformation, ham: &Hamiltonian) -> Result<()> {
        let take = self.seen % self.every == 0;
        self.seen += 1;
        if !take {
            return Ok(());
        }
        self.sums[0] += ham.total(conf)?;
        self.sums[1] += conf.mean_bond_sq();
        self.sums[2] += conf.end_to_end_sq();
        self.sums[3] += gyration_sq(conf);
        self.frames += 1;
        Ok(())
    }
}

/// Ensemble mean and standard error (across trajectories) of each observable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralSummary {
    pub energy: Estimate,
    pub bond_sq: Estimate,
    pub end_to_end_sq: Estimate,
    pub gyration_sq: Estimate,
    pub n_trajectories: usize,
}

pub fn structural_summary(samples: &[StructureSample]) -> Result<StructuralSummary> {
    if samples.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let col = |f: fn(&StructureSample) -> f64| {
        Estimate::from_samples(&samples.iter().map(f).collect::<Vec<_>>())
    };
    Ok(StructuralSummary {
        energy: col(|s| s.energy),
        bond_sq: col(|s| s.bond_sq),
        end_to_end_sq: col(|s| s.end_to_end_sq),
        gyration_sq: col(|s| s.gyration_sq),
        n_trajectories: samples.len(),
    })
}

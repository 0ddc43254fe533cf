use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::distance::PairGeometry;
use crate::dynamics::{SnapshotSink, Trajectory};
use crate::error::{Error, Result};
use crate::model::{Conformation, Hamiltonian};
use crate::stats;

/// Below this many samples a histogram is flagged as undersampled.
pub const MIN_HISTOGRAM_SAMPLES: usize = 100;

/// Normalised density histogram: `sum(density * width) == 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub n_samples: usize,
    /// Set when fewer than [`MIN_HISTOGRAM_SAMPLES`] values went in.
    pub undersampled: bool,
}

impl Histogram {
    /// Freedman-Diaconis bins unless `bins` is given. All-equal samples give a
    /// single unit-width bin centred on the value.
    pub fn from_samples(samples: &[f64], bins: Option<usize>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InsufficientSamples { found: 0, needed: 1 });
        }
        if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite histogram sample {bad}")));
        }
        let n = samples.len();
        let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let undersampled = n < MIN_HISTOGRAM_SAMPLES;
        if hi == lo {
            return Ok(Histogram {
                edges: vec![lo - 0.5, lo + 0.5],
                density: vec![1.0],
                n_samples: n,
                undersampled,
            });
        }
        let nbins = match bins {
            Some(0) => return Err(Error::InvalidParams("bin count must be >= 1".into())),
            Some(b) => b,
            None => {
                let iqr = stats::quantile(samples, 0.75) - stats::quantile(samples, 0.25);
                let w = 2.0 * iqr / (n as f64).cbrt();
                if w > 0.0 {
                    (((hi - lo) / w).ceil() as usize).clamp(1, 10_000)
                } else {
                    // Sturges when the quartiles coincide.
                    ((n as f64).log2().ceil() as usize + 1).max(1)
                }
            }
        };
        let width = (hi - lo) / nbins as f64;
        let edges: Vec<f64> = (0..=nbins).map(|k| lo + k as f64 * width).collect();
        let mut counts = vec![0usize; nbins];
        for &v in samples {
            let k = (((v - lo) / width) as usize).min(nbins - 1);
            counts[k] += 1;
        }
        let density = counts.iter().map(|&c| c as f64 / (n as f64 * width)).collect();
        Ok(Histogram { edges, density, n_samples: n, undersampled })
    }

    pub fn integral(&self) -> f64 {
        self.density
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_left,bin_right,density\n");
        for (d, e) in self.density.iter().zip(self.edges.windows(2)) {
            let _ = writeln!(s, "{:?},{:?},{:?}", e[0], e[1], d);
        }
        s
    }
}

/// `D4` between each trajectory's first snapshot and the one `lag` sweeps later.
pub fn d4_at_lag(trajectories: &[Trajectory], lag: u64) -> Result<Vec<f64>> {
    if trajectories.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    let mut out = Vec::with_capacity(trajectories.len());
    for (i, tr) in trajectories.iter().enumerate() {
        let (t0, c0) = tr.snapshots.first().ok_or(Error::MismatchedEnsemble {
            index: i,
            reason: "empty trajectory".into(),
        })?;
        let c1 = tr
            .snapshots
            .iter()
            .find(|(t, _)| *t == t0 + lag)
            .map(|(_, c)| c)
            .ok_or_else(|| Error::MismatchedEnsemble {
                index: i,
                reason: format!("no snapshot at lag {lag}"),
            })?;
        out.push(PairGeometry::new(c0).d4(&PairGeometry::new(c1))?);
    }
    Ok(out)
}

/// Histogram of `D4` at fixed lag across an ensemble.
pub fn d4_distribution(trajectories: &[Trajectory], lag: u64, bins: Option<usize>) -> Result<Histogram> {
    Histogram::from_samples(&d4_at_lag(trajectories, lag)?, bins)
}

/// Streaming sampler of `D4` at one fixed lag, with a new origin every
/// `origin_every` sweeps. With `origin_every >= lag` consecutive samples do
/// not share time intervals.
#[derive(Debug, Clone)]
pub struct FixedLagSampler {
    lag: u64,
    origin_every: u64,
    pending: std::collections::VecDeque<(u64, PairGeometry)>,
    pub samples: Vec<f64>,
}

impl FixedLagSampler {
    pub fn new(lag: u64, origin_every: u64) -> Result<Self> {
        if lag == 0 || origin_every == 0 {
            return Err(Error::InvalidParams("lag and origin spacing must be >= 1".into()));
        }
        Ok(FixedLagSampler { lag, origin_every, pending: Default::default(), samples: vec![] })
    }
}

impl SnapshotSink for FixedLagSampler {
    fn record(&mut self, mc_time: u64, conf: &Conformation, _ham: &Hamiltonian) -> Result<()> {
        let is_origin = mc_time % self.origin_every == 0;
        let closes = self.pending.front().is_some_and(|(t0, _)| t0 + self.lag == mc_time);
        if !is_origin && !closes {
            return Ok(());
        }
        let g = PairGeometry::new(conf);
        if closes {
            let (_, o) = self.pending.pop_front().expect("checked");
            self.samples.push(o.d4(&g)?);
        }
        if is_origin {
            self.pending.push_back((mc_time, g));
        }
        Ok(())
    }
}

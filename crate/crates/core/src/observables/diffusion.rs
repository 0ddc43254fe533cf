use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::distance::PairGeometry;
use crate::dynamics::{SnapshotSink, Trajectory};
use crate::error::{Error, Result};
use crate::model::{Conformation, Hamiltonian};
use crate::stats;

/// Sorted set of lag times (in sweeps), always starting at 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LagSchedule {
    lags: Vec<u64>,
}

impl LagSchedule {
    /// Explicit lags; sorted and deduplicated, 0 added if absent.
    pub fn new(mut lags: Vec<u64>) -> Self {
        lags.push(0);
        lags.sort_unstable();
        lags.dedup();
        LagSchedule { lags }
    }

    /// Roughly `per_decade` points per decade up to `max_lag`, every lag a
    /// multiple of `stride`. At short times this degenerates into every
    /// multiple of `stride`, which is what the window search needs.
    pub fn log_spaced(stride: u64, max_lag: u64, per_decade: usize) -> Result<Self> {
        if stride == 0 || per_decade == 0 {
            return Err(Error::InvalidParams(
                "lag schedule needs stride >= 1 and per_decade >= 1".into(),
            ));
        }
        let top = max_lag / stride;
        let mut lags = vec![0];
        let mut k = 0usize;
        loop {
            let m = 10f64.powf(k as f64 / per_decade as f64).round() as u64;
            if m > top {
                break;
            }
            lags.push(m * stride);
            k += 1;
        }
        Ok(Self::new(lags))
    }

    pub fn lags(&self) -> &[u64] {
        &self.lags
    }

    pub fn max_lag(&self) -> u64 {
        *self.lags.last().unwrap_or(&0)
    }

    pub fn len(&self) -> usize {
        self.lags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lags.is_empty()
    }
}

/// Which snapshots serve as time origins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OriginMode {
    /// Only the first recorded snapshot.
    Single,
    /// Every `every`-th recorded snapshot.
    Multi { every: u64 },
}

/// Per-trajectory `D4`/`D2` means for each lag, averaged over origins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagCurve {
    pub lags: Vec<u64>,
    pub d4: Vec<f64>,
    pub d2: Vec<f64>,
    pub counts: Vec<u64>,
}

impl LagCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,d4,d2,count\n");
        for k in 0..self.lags.len() {
            let _ = writeln!(s, "{},{:?},{:?},{}", self.lags[k], self.d4[k], self.d2[k], self.counts[k]);
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut c = LagCurve { lags: vec![], d4: vec![], d2: vec![], counts: vec![] };
        for (ln, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::Parse(format!("lag curve line {}: {line:?}", ln + 1));
            if f.len() != 4 {
                return Err(bad());
            }
            c.lags.push(f[0].parse().map_err(|_| bad())?);
            c.d4.push(f[1].parse().map_err(|_| bad())?);
            c.d2.push(f[2].parse().map_err(|_| bad())?);
            c.counts.push(f[3].parse().map_err(|_| bad())?);
        }
        Ok(c)
    }
}

/// Streaming lag accumulator. Feed it snapshots in order (directly or as a
/// [`SnapshotSink`]); only origin geometries inside the largest lag are
/// retained, so memory does not grow with run length.
#[derive(Debug, Clone)]
pub struct LagAccumulator {
    lags: Vec<u64>,
    stride: u64,
    // Spacing between origins in sweeps; None for a single origin.
    origin_spacing: Option<u64>,
    origins: VecDeque<(u64, PairGeometry)>,
    next_time: u64,
    d4: Vec<f64>,
    d2: Vec<f64>,
    counts: Vec<u64>,
}

impl LagAccumulator {
    pub fn new(schedule: &LagSchedule, stride: u64, mode: OriginMode) -> Result<Self> {
        if stride == 0 {
            return Err(Error::InvalidParams("record stride must be >= 1".into()));
        }
        if let Some(bad) = schedule.lags().iter().find(|&&l| l % stride != 0) {
            return Err(Error::InvalidParams(format!(
                "lag {bad} is not a multiple of the record stride {stride}"
            )));
        }
        let origin_spacing = match mode {
            OriginMode::Single => None,
            OriginMode::Multi { every } if every >= 1 => Some(every * stride),
            OriginMode::Multi { .. } => {
                return Err(Error::InvalidParams("origin spacing must be >= 1".into()))
            }
        };
        let n = schedule.len();
        Ok(LagAccumulator {
            lags: schedule.lags().to_vec(),
            stride,
            origin_spacing,
            origins: VecDeque::new(),
            next_time: 0,
            d4: vec![0.0; n],
            d2: vec![0.0; n],
            counts: vec![0; n],
        })
    }

    fn is_origin(&self, t: u64) -> bool {
        match self.origin_spacing {
            None => t == 0,
            Some(sp) => t % sp == 0,
        }
    }

    /// Add the snapshot at `mc_time`. Times must be 0, stride, 2*stride, ...
    pub fn push(&mut self, mc_time: u64, conf: &Conformation) -> Result<()> {
        if mc_time != self.next_time {
            return Err(Error::Domain(format!(
                "snapshot at t={mc_time}, expected t={}",
                self.next_time
            )));
        }
        self.next_time += self.stride;
        let g = PairGeometry::new(conf);
        if let Some((_, first)) = self.origins.front() {
            if first.n() != g.n() {
                return Err(Error::DimensionMismatch { expected: first.n(), found: g.n() });
            }
        }
        let max_lag = *self.lags.last().unwrap_or(&0);
        while let Some(&(t0, _)) = self.origins.front() {
            if mc_time - t0 > max_lag {
                self.origins.pop_front();
            } else {
                break;
            }
        }
        let origin_here = self.is_origin(mc_time);
        for (k, &lag) in self.lags.iter().enumerate() {
            if lag > mc_time {
                break;
            }
            let t0 = mc_time - lag;
            if !self.is_origin(t0) {
                continue;
            }
            let (d4, d2) = if lag == 0 {
                (0.0, 0.0)
            } else {
                let Some(o) = self.origin_at(t0) else { continue };
                (g.d4_unchecked(o), g.d2_unchecked(o))
            };
            self.d4[k] += d4;
            self.d2[k] += d2;
            self.counts[k] += 1;
        }
        if origin_here {
            self.origins.push_back((mc_time, g));
        }
        Ok(())
    }

    fn origin_at(&self, t0: u64) -> Option<&PairGeometry> {
        let &(front, _) = self.origins.front()?;
        if t0 < front {
            return None;
        }
        let idx = match self.origin_spacing {
            None => 0,
            Some(sp) => ((t0 - front) / sp) as usize,
        };
        self.origins.get(idx).filter(|(t, _)| *t == t0).map(|(_, g)| g)
    }

    /// Origin-averaged curve. Lags never reached keep count 0 and NaN means.
    pub fn finish(&self) -> LagCurve {
        let avg = |s: &[f64]| {
            s.iter()
                .zip(&self.counts)
                .map(|(v, &c)| if c > 0 { v / c as f64 } else { f64::NAN })
                .collect::<Vec<_>>()
        };
        LagCurve {
            lags: self.lags.clone(),
            d4: avg(&self.d4),
            d2: avg(&self.d2),
            counts: self.counts.clone(),
        }
    }
}

impl SnapshotSink for LagAccumulator {
    fn record(&mut self, mc_time: u64, conf: &Conformation, _ham: &Hamiltonian) -> Result<()> {
        self.push(mc_time, conf)
    }
}

/// Ensemble-averaged `D4(t)` and `D2(t)`. Errors are standard errors across
/// trajectories; `n_samples` counts contributing trajectories per lag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionSeries {
    pub times: Vec<f64>,
    pub d4_mean: Vec<f64>,
    pub d4_err: Vec<f64>,
    pub d2_mean: Vec<f64>,
    pub d2_err: Vec<f64>,
    pub n_samples: Vec<usize>,
}

impl DiffusionSeries {
    /// Combine per-trajectory curves that share the same lag grid. Lags no
    /// trajectory reached are dropped.
    pub fn from_curves(curves: &[LagCurve]) -> Result<Self> {
        let first = curves.first().ok_or(Error::EmptyEnsemble)?;
        for (i, c) in curves.iter().enumerate() {
            if c.lags != first.lags {
                return Err(Error::MismatchedEnsemble {
                    index: i,
                    reason: "lag grid differs from the first member".into(),
                });
            }
        }
        let mut s = DiffusionSeries::empty();
        for (k, &lag) in first.lags.iter().enumerate() {
            let take = |f: fn(&LagCurve) -> &Vec<f64>| -> Vec<f64> {
                curves.iter().filter(|c| c.counts[k] > 0).map(|c| f(c)[k]).collect()
            };
            let d4 = take(|c| &c.d4);
            if d4.is_empty() {
                continue;
            }
            let d2 = take(|c| &c.d2);
            s.times.push(lag as f64);
            s.d4_mean.push(stats::mean(&d4));
            s.d4_err.push(stats::std_error(&d4));
            s.d2_mean.push(stats::mean(&d2));
            s.d2_err.push(stats::std_error(&d2));
            s.n_samples.push(d4.len());
        }
        Ok(s)
    }

    fn empty() -> Self {
        DiffusionSeries {
            times: vec![],
            d4_mean: vec![],
            d4_err: vec![],
            d2_mean: vec![],
            d2_err: vec![],
            n_samples: vec![],
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Same series with every time multiplied by `factor`.
    pub fn rescaled_time(&self, factor: f64) -> Self {
        let mut s = self.clone();
        s.times.iter_mut().for_each(|t| *t *= factor);
        s
    }

    /// Value of `D4` at the largest lag not exceeding `t`.
    pub fn d4_at(&self, t: f64) -> Option<(f64, f64)> {
        let k = self.times.iter().rposition(|&x| x <= t)?;
        Some((self.d4_mean[k], self.d4_err[k]))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,d4_mean,d4_err,d2_mean,d2_err,n\n");
        for k in 0..self.len() {
            let _ = writeln!(
                s,
                "{:?},{:?},{:?},{:?},{:?},{}",
                self.times[k], self.d4_mean[k], self.d4_err[k], self.d2_mean[k], self.d2_err[k],
                self.n_samples[k]
            );
        }
        s
    }

    /// Parse the CSV written by [`DiffusionSeries::to_csv`]. Whitespace
    /// around fields is tolerated; the `d2` columns and `n` are optional.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| Error::Parse("empty series file".into()))?
            .split(',')
            .map(|h| h.trim().to_ascii_lowercase())
            .collect();
        let col = |name: &str| header.iter().position(|h| h == name);
        let (ct, c4) = match (col("t"), col("d4_mean")) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Parse("series header needs t and d4_mean".into())),
        };
        let (c4e, c2, c2e, cn) = (col("d4_err"), col("d2_mean"), col("d2_err"), col("n"));
        let mut s = DiffusionSeries::empty();
        for (ln, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::Parse(format!("series row {}: {line:?}", ln + 2));
            let num = |c: Option<usize>, default: f64| -> Result<f64> {
                match c {
                    None => Ok(default),
                    Some(i) => f.get(i).ok_or_else(bad)?.parse::<f64>().map_err(|_| bad()),
                }
            };
            s.times.push(num(Some(ct), 0.0)?);
            s.d4_mean.push(num(Some(c4), 0.0)?);
            s.d4_err.push(num(c4e, 0.0)?);
            s.d2_mean.push(num(c2, f64::NAN)?);
            s.d2_err.push(num(c2e, f64::NAN)?);
            s.n_samples.push(num(cn, 1.0)? as usize);
        }
        Ok(s)
    }
}

/// Ensemble `D4`/`D2` from stored trajectories. Members must share the record
/// stride and length.
pub fn diffusion_series(
    trajectories: &[Trajectory],
    schedule: &LagSchedule,
    mode: OriginMode,
) -> Result<DiffusionSeries> {
    let first = trajectories.first().ok_or(Error::EmptyEnsemble)?;
    let mut curves = Vec::with_capacity(trajectories.len());
    for (i, tr) in trajectories.iter().enumerate() {
        if tr.record_stride != first.record_stride || tr.len() != first.len() {
            return Err(Error::MismatchedEnsemble {
                index: i,
                reason: format!(
                    "stride {} / length {} vs {} / {}",
                    tr.record_stride,
                    tr.len(),
                    first.record_stride,
                    first.len()
                ),
            });
        }
        let n0 = first.snapshots.first().map(|(_, c)| c.n_sites());
        if tr.snapshots.first().map(|(_, c)| c.n_sites()) != n0 {
            return Err(Error::MismatchedEnsemble { index: i, reason: "site count differs".into() });
        }
        let mut acc = LagAccumulator::new(schedule, tr.record_stride, mode)?;
        for (t, c) in &tr.snapshots {
            acc.push(*t, c)?;
        }
        curves.push(acc.finish());
    }
    DiffusionSeries::from_curves(&curves)
}

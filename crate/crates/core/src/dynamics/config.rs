use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MoveDistribution {
    /// Uniform inside a ball of radius `trial_radius`.
    #[default]
    UniformBall,
    /// Uniform inside the cube `[-r, r]^3`.
    UniformCube,
    /// Isotropic Gaussian with per-component sigma `r / sqrt(3)`.
    Gaussian,
    /// `+-r` along one random axis. Keeps a chain on a cubic lattice of
    /// spacing `r`; meant for enumeration checks, not production runs.
    LatticeStep,
}

impl MoveDistribution {
    pub fn sample<R: Rng + ?Sized>(&self, radius: f64, rng: &mut R) -> Vec3 {
        match self {
            MoveDistribution::UniformBall => loop {
                let v = Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                if v.norm_squared() <= 1.0 {
                    return v * radius;
                }
            },
            MoveDistribution::UniformCube => Vec3::new(
                rng.random_range(-radius..radius),
                rng.random_range(-radius..radius),
                rng.random_range(-radius..radius),
            ),
            MoveDistribution::Gaussian => {
                let sigma = radius / 3f64.sqrt();
                Vec3::new(
                    rng.sample::<f64, _>(rand_distr::StandardNormal) * sigma,
                    rng.sample::<f64, _>(rand_distr::StandardNormal) * sigma,
                    rng.sample::<f64, _>(rand_distr::StandardNormal) * sigma,
                )
            }
            MoveDistribution::LatticeStep => {
                let k = rng.random_range(0..6usize);
                let mut v = Vec3::zeros();
                v[k / 2] = if k % 2 == 0 { radius } else { -radius };
                v
            }
        }
    }

    /// `<|delta|^2>` for trial radius `radius`.
    pub fn mean_sq_step(&self, radius: f64) -> f64 {
        match self {
            MoveDistribution::UniformBall => 0.6 * radius * radius,
            MoveDistribution::UniformCube | MoveDistribution::Gaussian | MoveDistribution::LatticeStep => {
                radius * radius
            }
        }
    }
}

impl fmt::Display for MoveDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MoveDistribution::UniformBall => "uniform_ball",
            MoveDistribution::UniformCube => "uniform_cube",
            MoveDistribution::Gaussian => "gaussian",
            MoveDistribution::LatticeStep => "lattice_step",
        })
    }
}

impl FromStr for MoveDistribution {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform_ball" => Ok(Self::UniformBall),
            "uniform_cube" => Ok(Self::UniformCube),
            "gaussian" => Ok(Self::Gaussian),
            "lattice_step" => Ok(Self::LatticeStep),
            other => Err(Error::Parse(format!("unknown move distribution `{other}`"))),
        }
    }
}

/// Knobs of the Metropolis engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsConfig {
    /// Maximum single-site displacement (initial value when tuning).
    pub trial_radius: f64,
    pub move_distribution: MoveDistribution,
    /// `None` picks ten estimated Rouse times, see [`DynamicsConfig::thermalize_sweeps`].
    pub sweeps_thermalize: Option<u64>,
    pub sweeps_measure: u64,
    /// Sweeps between recorded snapshots. A trailing partial interval of
    /// `sweeps_measure` is not simulated.
    pub record_stride: u64,
    pub rng_seed: u64,
    /// Adjust `trial_radius` during thermalisation towards `target_acceptance`.
    pub tune_trial_radius: bool,
    pub target_acceptance: (f64, f64),
    /// Visit sites in random order instead of `0..N`.
    pub random_site_order: bool,
    /// Accept every non-singular move (the `beta -> 0` limit).
    pub accept_all: bool,
    /// Abort when the measured acceptance rate leaves this band.
    pub acceptance_bounds: Option<(f64, f64)>,
    /// Sweeps between full energy recomputations.
    pub resync_interval: u64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            trial_radius: 0.5,
            move_distribution: MoveDistribution::UniformBall,
            sweeps_thermalize: None,
            sweeps_measure: 200_000,
            record_stride: 1,
            rng_seed: 0,
            tune_trial_radius: true,
            target_acceptance: (0.4, 0.6),
            random_site_order: false,
            accept_all: false,
            acceptance_bounds: Some((0.05, 0.95)),
            resync_interval: 10_000,
        }
    }
}

/// Floor and ceiling on the automatic thermalisation length.
const MIN_AUTO_THERMALIZE: u64 = 1_000;
const MAX_AUTO_THERMALIZE: u64 = 200_000;

impl DynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.trial_radius.is_finite() && self.trial_radius > 0.0) {
            return Err(Error::InvalidParams(format!(
                "trial_radius must be > 0, got {}",
                self.trial_radius
            )));
        }
        if self.sweeps_measure == 0 {
            return Err(Error::InvalidParams("sweeps_measure must be > 0".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::InvalidParams("record_stride must be >= 1".into()));
        }
        if self.resync_interval == 0 {
            return Err(Error::InvalidParams("resync_interval must be >= 1".into()));
        }
        let (lo, hi) = self.target_acceptance;
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(Error::InvalidParams(format!(
                "target_acceptance must satisfy 0 < lo < hi < 1, got ({lo}, {hi})"
            )));
        }
        Ok(())
    }

    /// Friction implied by small-step Metropolis, `zeta = 6 / (beta <delta^2>)`.
    pub fn effective_friction(&self, beta: f64) -> f64 {
        6.0 / (beta * self.move_distribution.mean_sq_step(self.trial_radius))
    }

    /// Estimated Rouse time `tau_r = zeta N^2 / (h pi^2)` in sweeps.
    pub fn rouse_time_estimate(&self, n_sites: usize, h: f64, beta: f64) -> Option<f64> {
        if h <= 0.0 {
            return None;
        }
        let n = n_sites as f64;
        Some(self.effective_friction(beta) * n * n / (h * PI * PI))
    }

    /// Explicit `sweeps_thermalize`, or `10 tau_r` clamped to a sane range.
    pub fn thermalize_sweeps(&self, n_sites: usize, h: f64, beta: f64) -> u64 {
        if let Some(s) = self.sweeps_thermalize {
            return s;
        }
        match self.rouse_time_estimate(n_sites, h, beta) {
            Some(tau) => ((10.0 * tau).ceil() as u64).clamp(MIN_AUTO_THERMALIZE, MAX_AUTO_THERMALIZE),
            None => 10 * MIN_AUTO_THERMALIZE,
        }
    }

    /// Number of sweeps actually simulated during measurement.
    pub fn measured_sweeps(&self) -> u64 {
        (self.sweeps_measure / self.record_stride) * self.record_stride
    }
}

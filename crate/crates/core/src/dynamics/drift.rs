use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{metropolis_accept, DynamicsConfig};
use crate::error::Result;
use crate::model::{Conformation, Hamiltonian, ModelParams, NoiseMatrix};
use crate::Vec3;

/// Mean single-step displacement of one site, measured and predicted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftSample {
    pub empirical: Vec3,
    /// Standard error of `empirical`, per component.
    pub std_err: Vec3,
    /// Small-step prediction `-(beta / 6) <|delta|^2> grad H`.
    pub predicted: Vec3,
}

impl DriftSample {
    /// Largest per-component deviation in units of the standard error.
    pub fn max_z(&self) -> f64 {
        (0..3)
            .map(|a| {
                let d = (self.empirical[a] - self.predicted[a]).abs();
                if self.std_err[a] > 0.0 {
                    d / self.std_err[a]
                } else if d == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }
}

/// Monte Carlo estimate of the mean displacement produced by one Metropolis
/// proposal at each site of a fixed conformation, next to the small-step
/// drift prediction. The conformation is never updated. Uses
/// `config.rng_seed`, `trial_radius` and `move_distribution`.
pub fn metropolis_drift_diagnostic(
    conf: &Conformation,
    params: &ModelParams,
    noise: &NoiseMatrix,
    config: &DynamicsConfig,
    n_samples: usize,
) -> Result<Vec<DriftSample>> {
    let ham = Hamiltonian::new(params, noise)?;
    let grad = ham.gradient(conf)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let msq = config.move_distribution.mean_sq_step(config.trial_radius);
    let beta = params.beta;
    let mut out = Vec::with_capacity(conf.n_sites());
    for (site, g) in grad.iter().enumerate() {
        let mut sum = Vec3::zeros();
        let mut sum_sq = Vec3::zeros();
        for _ in 0..n_samples {
            let delta = config
                .move_distribution
                .sample(config.trial_radius, &mut rng);
            let accepted = match ham.delta(conf.positions(), site, &delta) {
                Ok(de) => config.accept_all || metropolis_accept(de, beta, rng.random()),
                Err(_) => false,
            };
            if accepted {
                sum += delta;
                sum_sq += delta.component_mul(&delta);
            }
        }
        let n = n_samples as f64;
        let mean = sum / n;
        let var = (sum_sq / n - mean.component_mul(&mean)) * (n / (n - 1.0).max(1.0));
        let std_err = var.map(|v| (v.max(0.0) / n).sqrt());
        out.push(DriftSample {
            empirical: mean,
            std_err,
            predicted: -g * (beta / 6.0 * msq),
        });
    }
    Ok(out)
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default hard floor on pair distances below which energies are refused.
pub const DEFAULT_D_MIN: f64 = 1e-6;

/// Parameters that fully determine the Hamiltonian and the Boltzmann weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Chain length `N`.
    pub n_sites: usize,
    /// Harmonic bond stiffness.
    pub h: f64,
    /// Lennard-Jones attraction `A` (coefficient of `-1/d^6`).
    pub a_attract: f64,
    /// Lennard-Jones repulsion `R` (coefficient of `1/d^12`).
    pub r_repel: f64,
    /// Disorder strength; couplings enter as `sqrt(epsilon) * eta`.
    pub epsilon: f64,
    /// Inverse temperature.
    pub beta: f64,
    /// Drop the Lennard-Jones and disorder terms between bonded neighbours.
    #[serde(default)]
    pub exclude_adjacent_lj: bool,
    /// Coincidence floor on pair distances.
    #[serde(default = "default_d_min")]
    pub d_min: f64,
}

fn default_d_min() -> f64 {
    DEFAULT_D_MIN
}

impl ModelParams {
    pub fn new(n_sites: usize, h: f64, a_attract: f64, r_repel: f64, epsilon: f64, beta: f64) -> Self {
        ModelParams {
            n_sites,
            h,
            a_attract,
            r_repel,
            epsilon,
            beta,
            exclude_adjacent_lj: false,
            d_min: DEFAULT_D_MIN,
        }
    }

    /// Purely harmonic chain: `A = R = eps = 0`.
    pub fn harmonic(n_sites: usize, h: f64, beta: f64) -> Self {
        Self::new(n_sites, h, 0.0, 0.0, 0.0, beta)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::InvalidParams(format!(
                "n_sites must be >= 2, got {}",
                self.n_sites
            )));
        }
        let checks = [
            ("h", self.h),
            ("a_attract", self.a_attract),
            ("r_repel", self.r_repel),
            ("epsilon", self.epsilon),
        ];
        for (name, v) in checks {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if !self.beta.is_finite() || self.beta <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "beta must be finite and > 0, got {}",
                self.beta
            )));
        }
        if !self.d_min.is_finite() || self.d_min < 0.0 {
            return Err(Error::InvalidParams(format!("d_min must be >= 0, got {}", self.d_min)));
        }
        Ok(())
    }

    /// True when the Lennard-Jones part is active.
    pub fn has_lj(&self) -> bool {
        self.a_attract > 0.0 && self.r_repel > 0.0
    }
}

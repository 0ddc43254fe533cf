//! Chain state, quenched disorder and the Hamiltonian.
//!
//! All energies use the unordered-pair convention: every pair `i < j`
//! contributes once,
//!
//! ```text
//! H = h * sum_i d^2_{i,i+1}
//!   + sum_{i<j} [ -A / d^6_ij + R / d^12_ij + sqrt(eps) * eta_ij / d^6_ij ]
//! ```
//!
//! in reduced units with `k_B = 1`.

mod conformation;
mod energy;
mod noise;
mod params;

pub use conformation::{pairwise_distance_sq, Conformation};
pub use energy::{
    energy_delta, equilibrium_lj_distance, total_energy, EnergyBreakdown, Hamiltonian,
};
pub use noise::{generate_noise, NoiseDistribution, NoiseMatrix};
pub use params::ModelParams;

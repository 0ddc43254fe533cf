//! Simulation and analysis toolkit for disordered heteropolymer chains.
//!
//! A chain of `N` sites interacts through a harmonic bond between neighbours,
//! a Lennard-Jones pair potential between every pair and a quenched random
//! coupling `sqrt(eps) * eta_ij / d^6`. The crate evolves such chains with
//! Metropolis Monte Carlo, measures how the chain shape diffuses through the
//! `D2`/`D4` configuration distances, fits the short-time power law
//! `D4 ~ k t^nu`, and cross-checks the exponent against two independent
//! routes: the closed-form Rouse (Langevin normal-mode) prediction for the
//! harmonic chain, and the low-mode dispersion `lambda_p ~ p^alpha` of the
//! Hessian at a local minimum, which predicts `nu = 1 - 1/alpha`.
//!
//! Module map:
//!
//! * [`model`] - parameters, quenched noise, conformations and the Hamiltonian.
//! * [`dynamics`] - Metropolis engine, trajectories and checkpoints.
//! * [`observables`] - `D2`, `D4`, diffusion series, structural summaries, histograms.
//! * [`oracle`] - analytic normal-mode `D4(t)` and a toy Langevin integrator.
//! * [`spectral`] - minimisation, Hessian spectrum and dispersion fit.
//! * [`analysis`] - power-law fitting and the cross-campaign comparisons.
//! * [`campaign`] - configuration, presets and ensemble orchestration.

pub mod analysis;
pub mod campaign;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod observables;
pub mod oracle;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use model::{
    Conformation, EnergyBreakdown, Hamiltonian, ModelParams, NoiseDistribution, NoiseMatrix,
};
pub use dynamics::{DynamicsConfig, MoveDistribution, Trajectory};
pub use observables::DiffusionSeries;
pub use analysis::PowerLawFit;
pub use spectral::SpectrumFit;

/// Three-vector type used for site positions and displacements.
pub type Vec3 = nalgebra::Vector3<f64>;

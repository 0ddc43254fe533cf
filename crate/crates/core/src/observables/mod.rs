//! Configuration-distance observables and their ensemble averages.
//!
//! `D2` compares pair distances, `D4` compares squared pair distances:
//!
//! ```text
//! D2(a, b) = 1/N^2 sum_{i,j} (d_ij^a - d_ij^b)^2
//! D4(a, b) = 1/N^2 sum_{i,j} (d_ij^a^2 - d_ij^b^2)^2
//! ```
//!
//! Sums run over ordered pairs, so every unordered pair counts twice. Both
//! quantities only see internal distances and are blind to rigid motions.

mod diffusion;
mod distance;
mod histogram;
mod structure;

pub use diffusion::{
    diffusion_series, DiffusionSeries, LagAccumulator, LagCurve, LagSchedule, OriginMode,
};
pub use distance::{d2, d4, DistanceMatrix, PairGeometry};
pub use histogram::{d4_at_lag, d4_distribution, FixedLagSampler, Histogram};
pub use structure::{structural_summary, StructureAccumulator, StructureSample, StructuralSummary};

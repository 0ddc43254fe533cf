//! Power-law fits of `D4(t)` and the comparisons built on them.

mod compare;
mod fit;

pub use compare::{
    k_coeff_trends, nu_noise_independence, nu_vs_epsilon, NoiseIndependenceReport, NuRow, NuTable, Trend,
    TrendReport, Z_WITHIN_ERRORS,
};
pub use fit::{
    bootstrap_nu, fit_power_law, fit_power_law_with, local_slopes, select_window, FitOptions, PowerLawFit,
};

//! Closed-form normal-mode prediction of `D4(t)` for the harmonic chain and
//! an independent Langevin integrator to check it against.
//!
//! Two mode bases are offered. [`ModeBasis::Continuum`] evaluates the
//! continuum expression with its printed prefactor
//! `c = 64 * 3T / (h pi^2)` and `tau_r = zeta N^2 / (h pi^2)`. Its absolute
//! scale is not consistent with `D4` as measured, so it is only good for
//! shapes. [`ModeBasis::Discrete`] uses the exact eigenmodes of the finite
//! chain, `H = h sum |r_{i+1} - r_i|^2`, and Gaussian (Wick) factorisation:
//!
//! ```text
//! g_ij(t) = sum_p (phi_p(i) - phi_p(j))^2 T / (2 h mu_p) exp(-2 h mu_p t / zeta)
//! D4(t)   = 12 / N^2 sum_{i,j} [g_ij(0)^2 - g_ij(t)^2]
//! ```
//!
//! with `mu_p = 4 sin^2(p pi / 2N)`. This matches the observable exactly,
//! amplitude included, so only the time unit has to be matched against
//! Monte Carlo.

mod analytic;
mod langevin;
mod modes;

pub use analytic::{d4_analytic, d4_curve, fit_time_scale, kappa, oracle_csv, ModeBasis, OracleParams, TimeScaleFit};
pub use langevin::{langevin_toy_integrator, LangevinRun};
pub use modes::{inverse_normal_mode_transform, laplacian_eigenvalue, normal_mode_transform};

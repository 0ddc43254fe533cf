use std::fmt;

use serde::{Deserialize, Serialize};

use super::PowerLawFit;
use crate::error::{Error, Result};
use crate::stats;

/// "Within errors" means within this many combined standard errors.
pub const Z_WITHIN_ERRORS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuRow {
    pub epsilon: f64,
    pub nu_hat: f64,
    pub nu_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuTable {
    /// Sorted by epsilon.
    pub rows: Vec<NuRow>,
    /// No step up in epsilon raises nu by more than `Z_WITHIN_ERRORS`
    /// combined errors.
    pub weakly_decreasing: bool,
}

impl fmt::Display for NuTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>8}  {:>8}  {:>8}", "epsilon", "nu", "err")?;
        for r in &self.rows {
            writeln!(f, "{:>8.3}  {:>8.4}  {:>8.4}", r.epsilon, r.nu_hat, r.nu_err)?;
        }
        write!(f, "weakly decreasing within errors: {}", self.weakly_decreasing)
    }
}

pub fn nu_vs_epsilon(results: &[(f64, PowerLawFit)]) -> NuTable {
    let mut rows: Vec<NuRow> = results
        .iter()
        .map(|(e, fit)| NuRow { epsilon: *e, nu_hat: fit.nu_hat, nu_err: fit.nu_err })
        .collect();
    rows.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    let weakly_decreasing = rows.windows(2).all(|w| {
        let rise = w[1].nu_hat - w[0].nu_hat;
        rise <= Z_WITHIN_ERRORS * w[0].nu_err.hypot(w[1].nu_err)
    });
    NuTable { rows, weakly_decreasing }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseIndependenceReport {
    pub n_realizations: usize,
    pub nu_mean: f64,
    /// Sample standard deviation of `nu_hat` across realizations.
    pub nu_spread: f64,
    /// Median of the individual `nu_err`.
    pub typical_nu_err: f64,
    /// Sample standard deviation of `ln k` across realizations.
    pub ln_k_spread: f64,
    /// `nu_spread <= 2 * typical_nu_err`.
    pub nu_independent: bool,
}

impl fmt::Display for NoiseIndependenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} realizations: nu = {:.4}, spread {:.4} vs typical err {:.4} -> {}; ln k spread {:.4}",
            self.n_realizations,
            self.nu_mean,
            self.nu_spread,
            self.typical_nu_err,
            if self.nu_independent { "independent" } else { "DEPENDENT" },
            self.ln_k_spread
        )
    }
}

/// Compare the spread of `nu` across noise realizations with the individual
/// fit errors. Order of `fits` does not matter.
pub fn nu_noise_independence(fits: &[PowerLawFit]) -> Result<NoiseIndependenceReport> {
    if fits.len() < 3 {
        return Err(Error::InsufficientSamples { found: fits.len(), needed: 3 });
    }
    let sorted = |f: fn(&PowerLawFit) -> f64| {
        let mut v: Vec<f64> = fits.iter().map(f).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let nu = sorted(|f| f.nu_hat);
    let err = sorted(|f| f.nu_err);
    let lnk = sorted(|f| f.k_coeff.ln());
    let nu_spread = stats::sample_std(&nu);
    let typical = stats::median(&err);
    Ok(NoiseIndependenceReport {
        n_realizations: fits.len(),
        nu_mean: stats::mean(&nu),
        nu_spread,
        typical_nu_err: typical,
        ln_k_spread: stats::sample_std(&lnk),
        nu_independent: nu_spread <= 2.0 * typical,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Increasing,
    Decreasing,
    Flat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendReport {
    pub axis: String,
    /// Slope of `ln k` against `ln x`, or against `x` when `log_x` is false
    /// (used when the axis includes zero).
    pub slope: f64,
    pub slope_err: f64,
    pub log_x: bool,
    pub trend: Trend,
}

impl fmt::Display for TrendReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "k vs {}{}: slope {:.4} ± {:.4} -> {:?}",
            if self.log_x { "ln " } else { "" },
            self.axis,
            self.slope,
            self.slope_err,
            self.trend
        )
    }
}

/// Regress `ln k` on the swept variable. A trend is called when the slope is
/// more than `Z_WITHIN_ERRORS` standard errors from zero.
pub fn k_coeff_trends(axis: &str, xs: &[f64], fits: &[PowerLawFit]) -> Result<TrendReport> {
    if xs.len() != fits.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), found: fits.len() });
    }
    if xs.len() < 3 {
        return Err(Error::InsufficientSamples { found: xs.len(), needed: 3 });
    }
    let log_x = xs.iter().all(|&x| x > 0.0);
    let x: Vec<f64> = xs.iter().map(|&v| if log_x { v.ln() } else { v }).collect();
    let y: Vec<f64> = fits.iter().map(|f| f.k_coeff.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientSamples { found: 1, needed: 3 });
    }
    let slope = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = x.iter().zip(&y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    let slope_err = (rss / (n - 2.0) / sxx).sqrt();
    let trend = if slope > Z_WITHIN_ERRORS * slope_err {
        Trend::Increasing
    } else if slope < -Z_WITHIN_ERRORS * slope_err {
        Trend::Decreasing
    } else {
        Trend::Flat
    };
    Ok(TrendReport { axis: axis.to_string(), slope, slope_err, log_x, trend })
}

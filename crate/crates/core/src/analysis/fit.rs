use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::{DiffusionSeries, LagCurve};
use crate::stats;

/// Window-selection knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    /// Points with `t < skip_factor * t_min` are dropped (the first decade).
    pub skip_factor: f64,
    /// Points with `D4 > plateau_fraction * max(D4)` are dropped.
    pub plateau_fraction: f64,
    /// Largest allowed spread (max - min) of the local slope inside a window.
    pub slope_tolerance: f64,
    pub min_points: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { skip_factor: 10.0, plateau_fraction: 0.9, slope_tolerance: 0.05, min_points: 8 }
    }
}

/// `D4 ~ k t^nu` over `window`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub nu_hat: f64,
    pub nu_err: f64,
    pub k_coeff: f64,
    pub window: (f64, f64),
    /// Reduced chi-square (weighted) or residual variance in log space.
    pub goodness: f64,
    pub n_points: usize,
    pub weighted: bool,
}

impl fmt::Display for PowerLawFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "nu = {:.4} ± {:.4}, k = {:.4e}, window [{}, {}] ({} pts), goodness {:.3}",
            self.nu_hat, self.nu_err, self.k_coeff, self.window.0, self.window.1, self.n_points, self.goodness
        )
    }
}

/// Three-point log-log slopes; the first and last entries are `None`.
pub fn local_slopes(times: &[f64], values: &[f64]) -> Vec<Option<f64>> {
    let n = times.len();
    (0..n)
        .map(|k| {
            if k == 0 || k + 1 >= n {
                return None;
            }
            let (a, b) = (k - 1, k + 1);
            if times[a] <= 0.0 || values[a] <= 0.0 || values[b] <= 0.0 {
                return None;
            }
            Some((values[b] / values[a]).ln() / (times[b] / times[a]).ln())
        })
        .collect()
}

/// Indices of the auto-selected window, inclusive. Ties go to the earliest.
pub fn select_window(series: &DiffusionSeries, opts: &FitOptions) -> Result<(usize, usize)> {
    let t = &series.times;
    let y = &series.d4_mean;
    let t_min = t.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    let y_max = y.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if !t_min.is_finite() || !(y_max > 0.0) {
        return Err(Error::NoStableWindow);
    }
    let keep: Vec<usize> = (0..t.len())
        .filter(|&k| {
            t[k] >= opts.skip_factor * t_min && y[k] > 0.0 && y[k] <= opts.plateau_fraction * y_max
        })
        .collect();
    let kt: Vec<f64> = keep.iter().map(|&k| t[k]).collect();
    let ky: Vec<f64> = keep.iter().map(|&k| y[k]).collect();
    let slopes = local_slopes(&kt, &ky);
    let mut best: Option<(usize, usize)> = None;
    let m = keep.len();
    let mut a = 0;
    while a < m {
        if slopes[a].is_none() {
            a += 1;
            continue;
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut b = a;
        while b < m {
            let Some(s) = slopes[b] else { break };
            lo = lo.min(s);
            hi = hi.max(s);
            if hi - lo >= opts.slope_tolerance {
                break;
            }
            b += 1;
        }
        // [a, b) is the longest stable run starting at a.
        if b - a >= opts.min_points && best.is_none_or(|(x, y)| b - a > y - x + 1) {
            best = Some((a, b - 1));
        }
        a += 1;
    }
    let (a, b) = best.ok_or(Error::NoStableWindow)?;
    Ok((keep[a], keep[b]))
}

pub fn fit_power_law(series: &DiffusionSeries, window: Option<(f64, f64)>) -> Result<PowerLawFit> {
    fit_power_law_with(series, window, &FitOptions::default())
}

/// Weighted least squares of `ln D4` on `ln t`. Weights come from
/// `sigma_ln = d4_err / d4_mean`; if any error in the window is zero or
/// missing the fit is unweighted. The slope error is the covariance error
/// scaled by the square root of the reduced chi-square.
pub fn fit_power_law_with(
    series: &DiffusionSeries,
    window: Option<(f64, f64)>,
    opts: &FitOptions,
) -> Result<PowerLawFit> {
    let idx: Vec<usize> = match window {
        Some((lo, hi)) => {
            if !(lo < hi) {
                return Err(Error::InvalidParams(format!("window [{lo}, {hi}] is empty")));
            }
            let v: Vec<usize> = (0..series.len())
                .filter(|&k| series.times[k] >= lo && series.times[k] <= hi)
                .collect();
            if let Some(&k) = v.iter().find(|&&k| !(series.d4_mean[k] > 0.0 && series.times[k] > 0.0)) {
                return Err(Error::Domain(format!(
                    "non-positive point t={}, d4={} inside the window",
                    series.times[k], series.d4_mean[k]
                )));
            }
            v
        }
        None => {
            let (a, b) = select_window(series, opts)?;
            (a..=b).collect()
        }
    };
    if idx.len() < opts.min_points {
        return Err(Error::WindowTooSmall { found: idx.len(), needed: opts.min_points });
    }
    let x: Vec<f64> = idx.iter().map(|&k| series.times[k].ln()).collect();
    let y: Vec<f64> = idx.iter().map(|&k| series.d4_mean[k].ln()).collect();
    let sig: Vec<f64> = idx.iter().map(|&k| series.d4_err[k] / series.d4_mean[k]).collect();
    let weighted = sig.iter().all(|s| s.is_finite() && *s > 0.0);
    let w: Vec<f64> = if weighted { sig.iter().map(|s| 1.0 / (s * s)).collect() } else { vec![1.0; x.len()] };
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(&w).map(|(a, b)| b * (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).zip(&w).map(|((a, c), b)| b * (a - mx) * (c - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::WindowTooSmall { found: 1, needed: 2 });
    }
    let nu = sxy / sxx;
    let intercept = my - nu * mx;
    let chi2: f64 = x.iter().zip(&y).zip(&w).map(|((a, c), b)| b * (c - intercept - nu * a).powi(2)).sum();
    let dof = (x.len() - 2) as f64;
    let red = chi2 / dof;
    // Unweighted: cov = s^2 / Sxx with s^2 the residual variance (== red).
    let nu_err = (red / sxx).sqrt();
    Ok(PowerLawFit {
        nu_hat: nu,
        nu_err,
        k_coeff: intercept.exp(),
        window: (series.times[idx[0]], series.times[*idx.last().unwrap()]),
        goodness: red,
        n_points: idx.len(),
        weighted,
    })
}

/// Bootstrap standard deviation of `nu_hat` over trajectories: resample the
/// per-trajectory curves with replacement and refit inside `window`.
pub fn bootstrap_nu(curves: &[LagCurve], window: (f64, f64), resamples: usize, seed: u64) -> Result<f64> {
    if curves.len() < 2 {
        return Err(Error::InsufficientSamples { found: curves.len(), needed: 2 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nus = Vec::with_capacity(resamples);
    let opts = FitOptions { min_points: 3, ..Default::default() };
    for _ in 0..resamples {
        let pick: Vec<LagCurve> = (0..curves.len())
            .map(|_| curves[rng.random_range(0..curves.len())].clone())
            .collect();
        let s = DiffusionSeries::from_curves(&pick)?;
        if let Ok(f) = fit_power_law_with(&s, Some(window), &opts) {
            nus.push(f.nu_hat);
        }
    }
    if nus.len() < 2 {
        return Err(Error::InsufficientSamples { found: nus.len(), needed: 2 });
    }
    Ok(stats::sample_std(&nus))
}

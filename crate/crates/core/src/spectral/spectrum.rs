use std::fmt::Write as _;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Conformation, Hamiltonian, ModelParams, NoiseMatrix};
use crate::stats::Estimate;

/// Eigenvalues below this fraction of the largest one count as rigid modes.
pub const ZERO_MODE_RTOL: f64 = 1e-8;

const MIN_POSITIVE_MODES: usize = 10;
const MIN_WINDOW: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFit {
    /// All eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub n_zero_modes: usize,
    /// Consecutive eigenvalues sharing one mode index `p`: 3 for Hessians
    /// (one per Cartesian direction), 1 for a plain list.
    pub modes_per_index: usize,
    pub alpha_hat: Option<f64>,
    pub alpha_err: Option<f64>,
    /// Inclusive `(p_lo, p_hi)` used by the last fit.
    pub fit_window: Option<(usize, usize)>,
}

impl SpectrumFit {
    /// Wrap an arbitrary spectrum (sorted here). Zero modes are classified with
    /// [`ZERO_MODE_RTOL`].
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>, modes_per_index: usize) -> Result<Self> {
        if eigenvalues.is_empty() || eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("spectrum must be non-empty and finite".into()));
        }
        if modes_per_index == 0 {
            return Err(Error::InvalidParams("modes_per_index must be >= 1".into()));
        }
        eigenvalues.sort_by(f64::total_cmp);
        let top = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = ZERO_MODE_RTOL * top;
        let n_zero_modes = eigenvalues.iter().filter(|v| v.abs() < tol).count();
        Ok(SpectrumFit {
            eigenvalues,
            n_zero_modes,
            modes_per_index,
            alpha_hat: None,
            alpha_err: None,
            fit_window: None,
        })
    }

    /// `(p, lambda_p)` for every eigenvalue above the zero-mode tolerance.
    pub fn indexed_modes(&self) -> Vec<(usize, f64)> {
        let top = self.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = ZERO_MODE_RTOL * top;
        self.eigenvalues
            .iter()
            .filter(|v| **v >= tol)
            .enumerate()
            .map(|(k, &v)| (k / self.modes_per_index + 1, v))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("p,lambda_p\n");
        for (p, v) in self.indexed_modes() {
            let _ = writeln!(s, "{p},{v:?}");
        }
        s
    }

    /// `{alpha_hat, alpha_err, window, n_zero_modes}`.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "alpha_hat": self.alpha_hat,
            "alpha_err": self.alpha_err,
            "window": self.fit_window,
            "n_zero_modes": self.n_zero_modes,
        })
    }
}

/// Eigenvalues of the analytic Hessian at `conf`. A negative eigenvalue
/// beyond the zero-mode tolerance means `conf` is not a minimum.
pub fn hessian_spectrum(conf: &Conformation, params: &ModelParams, noise: &NoiseMatrix) -> Result<SpectrumFit> {
    params.validate()?;
    let ham = Hamiltonian::new(params, noise)?;
    let hess = ham.hessian(conf)?;
    let eig = SymmetricEigen::new(hess);
    let spec = SpectrumFit::from_eigenvalues(eig.eigenvalues.iter().copied().collect(), 3)?;
    let top = spec.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = ZERO_MODE_RTOL * top;
    if spec.eigenvalues[0] < -tol {
        return Err(Error::Saddle { eigenvalue: spec.eigenvalues[0], tolerance: tol });
    }
    Ok(spec)
}

/// Least-squares slope of `ln lambda_p` against `ln(p/N)`. The default
/// window is the lowest quarter of the positive modes (at least ten positive
/// modes required).
pub fn fit_alpha(spectrum: &SpectrumFit, n_sites: usize, window: Option<(usize, usize)>) -> Result<SpectrumFit> {
    let modes = spectrum.indexed_modes();
    if modes.len() < MIN_POSITIVE_MODES {
        return Err(Error::WindowTooSmall { found: modes.len(), needed: MIN_POSITIVE_MODES });
    }
    let (p_lo, p_hi) = match window {
        Some(w) => w,
        None => {
            let take = (modes.len() / 4).max(MIN_WINDOW);
            (modes[0].0, modes[take - 1].0)
        }
    };
    let pts: Vec<(f64, f64)> = modes
        .iter()
        .filter(|(p, _)| *p >= p_lo && *p <= p_hi)
        .map(|&(p, v)| ((p as f64 / n_sites as f64).ln(), v.ln()))
        .collect();
    let distinct = {
        let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        xs.dedup();
        xs.len()
    };
    if pts.len() < MIN_WINDOW || distinct < 2 {
        return Err(Error::WindowTooSmall { found: pts.len(), needed: MIN_WINDOW });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let err = if pts.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    let mut out = spectrum.clone();
    out.alpha_hat = Some(slope);
    out.alpha_err = Some(err);
    out.fit_window = Some((p_lo, p_hi));
    Ok(out)
}

/// `nu = 1 - 1/alpha`.
pub fn predict_nu(alpha_hat: f64) -> Result<f64> {
    if alpha_hat.is_nan() || alpha_hat <= 1.0 {
        return Err(Error::Domain(format!("predict_nu needs alpha > 1, got {alpha_hat}")));
    }
    Ok(1.0 - 1.0 / alpha_hat)
}

/// Mean and standard error of `alpha_hat` across fitted spectra (one per
/// noise realization or minimum).
pub fn summarize_alpha(fits: &[SpectrumFit]) -> Result<Estimate> {
    let a: Vec<f64> = fits.iter().filter_map(|f| f.alpha_hat).collect();
    if a.is_empty() {
        return Err(Error::EmptyEnsemble);
    }
    Ok(Estimate::from_samples(&a))
}

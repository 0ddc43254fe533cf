//! Local minima, Hessian spectra and the low-mode dispersion exponent.
//!
//! Around a minimum the linearised dynamics relaxes mode `p` at a rate set
//! by the Hessian eigenvalue `lambda_p`. If `lambda_p ~ (p/N)^alpha` at small
//! `p`, the short-time `D4` exponent is `nu = 1 - 1/alpha`.

mod minimize;
mod spectrum;

pub use minimize::{local_minimize, local_minimize_with, MinimizeOptions, Minimum};
pub use spectrum::{fit_alpha, hessian_spectrum, predict_nu, summarize_alpha, SpectrumFit, ZERO_MODE_RTOL};

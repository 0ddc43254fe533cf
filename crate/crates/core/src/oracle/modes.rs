use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::Conformation;
use crate::Vec3;

/// Eigenvalue `4 sin^2(p pi / 2N)` of the open-chain path Laplacian.
pub fn laplacian_eigenvalue(p: usize, n: usize) -> f64 {
    let s = (p as f64 * PI / (2 * n) as f64).sin();
    4.0 * s * s
}

// Site n sits at n + 1/2 on the contour, i.e. a midpoint rule for the
// continuum integral. With this sampling the cosines are exactly orthogonal.
#[inline]
pub(crate) fn mode_cos(p: usize, site: usize, n: usize) -> f64 {
    (p as f64 * PI * (site as f64 + 0.5) / n as f64).cos()
}

/// Mode amplitudes `x_p = 1/N sum_n r_n cos(p pi (n + 1/2) / N)` for
/// `p = 0..N-1`, per Cartesian component. `x_0` is the centre of mass.
pub fn normal_mode_transform(conf: &Conformation) -> Vec<Vec3> {
    let n = conf.n_sites();
    (0..n)
        .map(|p| {
            conf.positions()
                .iter()
                .enumerate()
                .map(|(s, r)| r * mode_cos(p, s, n))
                .sum::<Vec3>()
                / n as f64
        })
        .collect()
}

/// Inverse of [`normal_mode_transform`]: `r_n = x_0 + 2 sum_{p>=1} x_p cos(...)`.
pub fn inverse_normal_mode_transform(modes: &[Vec3]) -> Result<Conformation> {
    let n = modes.len();
    if n < 2 {
        return Err(Error::InvalidParams("need at least two modes".into()));
    }
    let pos = (0..n)
        .map(|s| {
            modes[0]
                + modes[1..]
                    .iter()
                    .enumerate()
                    .map(|(k, x)| x * (2.0 * mode_cos(k + 1, s, n)))
                    .sum::<Vec3>()
        })
        .collect();
    Conformation::new(pos)
}

use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

use super::{Conformation, ModelParams, NoiseMatrix};
use crate::error::{Error, Result};
use crate::Vec3;

/// Energy split by term.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub harmonic: f64,
    pub attractive: f64,
    pub repulsive: f64,
    pub disorder: f64,
    pub total: f64,
}

/// Pair distance at which `-A/d^6 + R/d^12` is minimal, `(2R/A)^(1/6)`.
pub fn equilibrium_lj_distance(params: &ModelParams) -> Result<f64> {
    let (a, r) = (params.a_attract, params.r_repel);
    if !(a > 0.0 && r > 0.0) {
        return Err(Error::Domain(format!(
            "equilibrium distance needs A > 0 and R > 0 (A = {a}, R = {r})"
        )));
    }
    Ok((2.0 * r / a).powf(1.0 / 6.0))
}

/// Precomputed pair coefficients for one `(params, noise)` combination.
///
/// Every pair energy is written as a function of the squared distance `s`:
/// `phi_ij(s) = k_ij s + c6_ij / s^3 + c12_ij / s^6`, with `k_ij = h` on
/// bonds and zero elsewhere, `c6_ij = -A + sqrt(eps) eta_ij` and
/// `c12_ij = R`.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    n: usize,
    h: f64,
    a: f64,
    r: f64,
    d_min: f64,
    d_min_sq: f64,
    c6: Vec<f64>,
    c12: Vec<f64>,
    disorder: Vec<f64>,
    lj_mask: Vec<bool>,
}

impl Hamiltonian {
    pub fn new(params: &ModelParams, noise: &NoiseMatrix) -> Result<Self> {
        params.validate()?;
        let n = params.n_sites;
        if noise.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: noise.n(),
            });
        }
        let sqrt_eps = params.epsilon.sqrt();
        let mut c6 = vec![0.0; n * n];
        let mut c12 = vec![0.0; n * n];
        let mut disorder = vec![0.0; n * n];
        let mut lj_mask = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j || (params.exclude_adjacent_lj && i.abs_diff(j) == 1) {
                    continue;
                }
                let k = i * n + j;
                lj_mask[k] = true;
                disorder[k] = sqrt_eps * noise.get(i, j);
                c6[k] = -params.a_attract + disorder[k];
                c12[k] = params.r_repel;
            }
        }
        Ok(Hamiltonian {
            n,
            h: params.h,
            a: params.a_attract,
            r: params.r_repel,
            d_min: params.d_min,
            d_min_sq: params.d_min * params.d_min,
            c6,
            c12,
            disorder,
            lj_mask,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    #[inline]
    fn bond_k(&self, i: usize, j: usize) -> f64 {
        if i.abs_diff(j) == 1 {
            self.h
        } else {
            0.0
        }
    }

    #[inline]
    fn check(&self, i: usize, j: usize, s: f64) -> Result<()> {
        if s < self.d_min_sq || s.is_nan() {
            return Err(Error::Singular {
                i: i.min(j),
                j: i.max(j),
                distance: s.sqrt(),
                floor: self.d_min,
            });
        }
        Ok(())
    }

    /// Energy of pair `(i, j)` at squared distance `s`.
    #[inline]
    pub fn pair_energy(&self, i: usize, j: usize, s: f64) -> f64 {
        let k = i * self.n + j;
        let inv3 = 1.0 / (s * s * s);
        self.bond_k(i, j) * s + self.c6[k] * inv3 + self.c12[k] * inv3 * inv3
    }

    /// First and second derivative of `phi_ij` with respect to `s`.
    #[inline]
    fn pair_derivatives(&self, i: usize, j: usize, s: f64) -> (f64, f64) {
        let k = i * self.n + j;
        let inv = 1.0 / s;
        let inv4 = inv * inv * inv * inv;
        let inv7 = inv4 * inv * inv * inv;
        let d1 = self.bond_k(i, j) - 3.0 * self.c6[k] * inv4 - 6.0 * self.c12[k] * inv7;
        let d2 = 12.0 * self.c6[k] * inv4 * inv + 42.0 * self.c12[k] * inv7 * inv;
        (d1, d2)
    }

    fn check_len(&self, conf: &Conformation) -> Result<()> {
        if conf.n_sites() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: conf.n_sites(),
            });
        }
        Ok(())
    }

    /// Total energy without the term-by-term split.
    pub fn total(&self, conf: &Conformation) -> Result<f64> {
        self.check_len(conf)?;
        let pos = conf.positions();
        let mut e = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let s = (pos[i] - pos[j]).norm_squared();
                self.check(i, j, s)?;
                e += self.pair_energy(i, j, s);
            }
        }
        Ok(e)
    }

    pub fn breakdown(&self, conf: &Conformation) -> Result<EnergyBreakdown> {
        self.check_len(conf)?;
        let pos = conf.positions();
        let mut out = EnergyBreakdown::default();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let s = (pos[i] - pos[j]).norm_squared();
                self.check(i, j, s)?;
                if j == i + 1 {
                    out.harmonic += self.h * s;
                }
                let k = i * self.n + j;
                if self.lj_mask[k] {
                    let inv6 = 1.0 / (s * s * s);
                    out.attractive -= self.a * inv6;
                    out.repulsive += self.r * inv6 * inv6;
                    out.disorder += self.disorder[k] * inv6;
                }
            }
        }
        out.total = out.harmonic + out.attractive + out.repulsive + out.disorder;
        Ok(out)
    }

    /// Interaction energy of `site` placed at `at` with every other site.
    #[inline]
    pub fn site_energy(&self, positions: &[Vec3], site: usize, at: &Vec3) -> Result<f64> {
        let mut e = 0.0;
        for (j, pj) in positions.iter().enumerate() {
            if j == site {
                continue;
            }
            let s = (at - pj).norm_squared();
            self.check(site, j, s)?;
            e += self.pair_energy(site, j, s);
        }
        Ok(e)
    }

    /// `H(site moved by displacement) - H(current)`, touching only the
    /// `N - 1` pairs that involve `site`.
    #[inline]
    pub fn delta(&self, positions: &[Vec3], site: usize, displacement: &Vec3) -> Result<f64> {
        let old = positions[site];
        let new = old + displacement;
        let mut de = 0.0;
        for (j, pj) in positions.iter().enumerate() {
            if j == site {
                continue;
            }
            let s_new = (new - pj).norm_squared();
            self.check(site, j, s_new)?;
            let s_old = (old - pj).norm_squared();
            de += self.pair_energy(site, j, s_new) - self.pair_energy(site, j, s_old);
        }
        Ok(de)
    }

    /// Gradient of the total energy, one vector per site.
    pub fn gradient(&self, conf: &Conformation) -> Result<Vec<Vec3>> {
        self.check_len(conf)?;
        let pos = conf.positions();
        let mut g = vec![Vec3::zeros(); self.n];
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let u = pos[i] - pos[j];
                let s = u.norm_squared();
                self.check(i, j, s)?;
                let (d1, _) = self.pair_derivatives(i, j, s);
                let f = u * (2.0 * d1);
                g[i] += f;
                g[j] -= f;
            }
        }
        Ok(g)
    }

    /// Analytic `3N x 3N` Hessian; rows and columns ordered
    /// `(x0, y0, z0, x1, ...)`.
    pub fn hessian(&self, conf: &Conformation) -> Result<DMatrix<f64>> {
        self.check_len(conf)?;
        let pos = conf.positions();
        let dim = 3 * self.n;
        let mut hess = DMatrix::zeros(dim, dim);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let u = pos[i] - pos[j];
                let s = u.norm_squared();
                self.check(i, j, s)?;
                let (d1, d2) = self.pair_derivatives(i, j, s);
                let block: Matrix3<f64> =
                    Matrix3::identity() * (2.0 * d1) + u * u.transpose() * (4.0 * d2);
                for a in 0..3 {
                    for b in 0..3 {
                        let v = block[(a, b)];
                        hess[(3 * i + a, 3 * i + b)] += v;
                        hess[(3 * j + a, 3 * j + b)] += v;
                        hess[(3 * i + a, 3 * j + b)] -= v;
                        hess[(3 * j + a, 3 * i + b)] -= v;
                    }
                }
            }
        }
        Ok(hess)
    }
}

/// Energy of `conf`, split into its four terms.
pub fn total_energy(
    conf: &Conformation,
    params: &ModelParams,
    noise: &NoiseMatrix,
) -> Result<EnergyBreakdown> {
    Hamiltonian::new(params, noise)?.breakdown(conf)
}

/// Energy change from moving `site` by `displacement`.
pub fn energy_delta(
    conf: &Conformation,
    params: &ModelParams,
    noise: &NoiseMatrix,
    site: usize,
    displacement: &Vec3,
) -> Result<f64> {
    let ham = Hamiltonian::new(params, noise)?;
    if site >= conf.n_sites() {
        return Err(Error::InvalidParams(format!("site {site} out of range")));
    }
    ham.check_len(conf)?;
    ham.delta(conf.positions(), site, displacement)
}

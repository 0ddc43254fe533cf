use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::modes::{laplacian_eigenvalue, mode_cos};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeBasis {
    /// Exact eigenmodes of the finite chain; absolute amplitude.
    #[default]
    Discrete,
    /// Continuum cosines `cos(p pi i / N)` with the printed prefactor.
    Continuum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub n_sites: usize,
    pub h: f64,
    /// `k_B T`.
    pub temperature: f64,
    pub zeta: f64,
    pub p_max: usize,
    /// Dispersion exponent; 2 for the harmonic chain.
    pub alpha: f64,
    pub basis: ModeBasis,
}

impl OracleParams {
    /// Harmonic chain in the discrete basis with every mode kept.
    pub fn harmonic(n_sites: usize, h: f64, temperature: f64, zeta: f64) -> Result<Self> {
        let p = OracleParams {
            n_sites,
            h,
            temperature,
            zeta,
            p_max: n_sites.saturating_sub(1),
            alpha: 2.0,
            basis: ModeBasis::Discrete,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_basis(mut self, basis: ModeBasis) -> Self {
        self.basis = basis;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn with_p_max(mut self, p_max: usize) -> Result<Self> {
        self.p_max = p_max;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.n_sites < 2 {
            return bad(format!("oracle needs n_sites >= 2, got {}", self.n_sites));
        }
        if self.p_max < 1 || self.p_max > self.n_sites - 1 {
            return bad(format!("p_max must lie in 1..={}, got {}", self.n_sites - 1, self.p_max));
        }
        if !(self.h > 0.0 && self.h.is_finite()) || !(self.zeta > 0.0 && self.zeta.is_finite()) {
            return bad("oracle needs h > 0 and zeta > 0".into());
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return bad(format!("temperature must be >= 0, got {}", self.temperature));
        }
        if !(self.alpha > 1.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must exceed 1, got {}", self.alpha));
        }
        Ok(())
    }

    pub fn tau0(&self) -> f64 {
        self.zeta / (self.h * PI * PI)
    }

    /// `tau_r = zeta N^2 / (h pi^2)`.
    pub fn tau_r(&self) -> f64 {
        self.tau0() * (self.n_sites * self.n_sites) as f64
    }

    /// Printed continuum prefactor `64 * 3T / (h pi^2)`.
    pub fn c_const(&self) -> f64 {
        64.0 * 3.0 * self.temperature / (self.h * PI * PI)
    }

    fn is_quadratic(&self) -> bool {
        self.alpha == 2.0
    }
}

// One mode's contribution to the pair sum: weight * (cos_i - cos_j)^2 * exp(-rate t).
struct ModeTable {
    weight: Vec<f64>,
    rate: Vec<f64>,
    // cos[p][site]
    cos: Vec<Vec<f64>>,
    scale: f64,
}

impl ModeTable {
    fn new(op: &OracleParams, generic: bool) -> Self {
        let n = op.n_sites;
        let mut t = ModeTable { weight: vec![], rate: vec![], cos: vec![], scale: 0.0 };
        match op.basis {
            ModeBasis::Continuum => {
                let tau_r = op.tau_r();
                for p in 1..=op.p_max {
                    let w = if generic { (p as f64).powf(op.alpha) } else { (p * p) as f64 };
                    t.weight.push(1.0 / w);
                    t.rate.push(w / tau_r);
                    // Sites numbered 1..N in the continuum form.
                    t.cos.push((1..=n).map(|i| (p as f64 * PI * i as f64 / n as f64).cos()).collect());
                }
                t.scale = op.c_const();
            }
            ModeBasis::Discrete => {
                for p in 1..=op.p_max {
                    let mu = laplacian_eigenvalue(p, n);
                    let w = if generic { mu.powf(op.alpha / 2.0) } else { mu };
                    // phi_p = sqrt(2/N) cos(...): fold 2/N into the weight.
                    t.weight.push(2.0 / n as f64 * op.temperature / (2.0 * op.h * w));
                    t.rate.push(2.0 * op.h * w / op.zeta);
                    t.cos.push((0..n).map(|s| mode_cos(p, s, n)).collect());
                }
                t.scale = 12.0 / (n * n) as f64;
            }
        }
        t
    }

    // (S(0), S(0) - S(t)) for one pair, the second computed without cancellation.
    fn pair_sums(&self, i: usize, j: usize, t: f64) -> (f64, f64) {
        let (mut s0, mut drop) = (0.0, 0.0);
        for p in 0..self.weight.len() {
            let dc = self.cos[p][i] - self.cos[p][j];
            let a = self.weight[p] * dc * dc;
            s0 += a;
            drop += -a * (-self.rate[p] * t).exp_m1();
        }
        (s0, drop)
    }

    fn kappa(&self, i: usize, j: usize, t: f64) -> f64 {
        let (s0, drop) = self.pair_sums(i, j, t);
        let st = s0 - drop;
        self.scale * st * st
    }

    fn d4(&self, t: f64) -> f64 {
        let n = self.cos[0].len();
        let mut total = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                let (s0, drop) = self.pair_sums(i, j, t);
                // S0^2 - St^2 = drop * (2 S0 - drop)
                total += drop * (2.0 * s0 - drop);
            }
        }
        2.0 * self.scale * total
    }
}

/// Pair correlation `kappa_ij(t)` for sites `i, j` in `1..=N`.
pub fn kappa(i: usize, j: usize, t: f64, op: &OracleParams) -> f64 {
    debug_assert!(i >= 1 && j >= 1 && i <= op.n_sites && j <= op.n_sites);
    ModeTable::new(op, !op.is_quadratic()).kappa(i - 1, j - 1, t)
}

/// Same as [`kappa`] but always through the `p^alpha` code path.
#[cfg(test)]
fn kappa_generic(i: usize, j: usize, t: f64, op: &OracleParams) -> f64 {
    ModeTable::new(op, true).kappa(i - 1, j - 1, t)
}

/// `D4(t) = sum_{i,j} [kappa_ij(0) - kappa_ij(t)]`.
pub fn d4_analytic(t: f64, op: &OracleParams) -> f64 {
    ModeTable::new(op, !op.is_quadratic()).d4(t)
}

/// [`d4_analytic`] over many times, building the mode table once.
pub fn d4_curve(times: &[f64], op: &OracleParams) -> Vec<f64> {
    let table = ModeTable::new(op, !op.is_quadratic());
    times.iter().map(|&t| table.d4(t)).collect()
}

pub fn oracle_csv(times: &[f64], values: &[f64]) -> String {
    let mut s = String::from("t,d4_analytic\n");
    for (t, v) in times.iter().zip(values) {
        let _ = writeln!(s, "{t:?},{v:?}");
    }
    s
}

/// Result of matching the oracle's time unit to a measured curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeScaleFit {
    /// Measured time `t` corresponds to oracle time `scale * t`.
    pub scale: f64,
    /// Friction that makes the oracle run in measured units: `zeta / scale`.
    pub zeta_eff: f64,
    pub rms_log_residual: f64,
    /// Largest `|oracle / measured - 1|` over the points used.
    pub max_rel_dev: f64,
    pub n_points: usize,
}

/// One-parameter least squares in log space: find `s` minimising
/// `sum (ln D(t) - ln D4_oracle(s t))^2` over points with `D(t) > 0`.
pub fn fit_time_scale(times: &[f64], values: &[f64], op: &OracleParams) -> Result<TimeScaleFit> {
    op.validate()?;
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(t, v)| **t > 0.0 && **v > 0.0 && v.is_finite())
        .map(|(t, v)| (*t, *v))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientSamples { found: pts.len(), needed: 2 });
    }
    let table = ModeTable::new(op, !op.is_quadratic());
    let cost = |ls: f64| -> f64 {
        let s = ls.exp();
        pts.iter()
            .map(|&(t, v)| {
                let m = table.d4(s * t);
                if m > 0.0 {
                    (v.ln() - m.ln()).powi(2)
                } else {
                    1e6
                }
            })
            .sum()
    };
    // Coarse scan, then golden section around the best grid point.
    let grid: Vec<f64> = (-300..=300).map(|k| k as f64 * 0.05).collect();
    let best = grid
        .iter()
        .copied()
        .min_by(|a, b| cost(*a).total_cmp(&cost(*b)))
        .expect("non-empty grid");
    let (mut a, mut b) = (best - 0.05, best + 0.05);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if cost(c) < cost(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let ls = 0.5 * (a + b);
    let s = ls.exp();
    let max_rel_dev = pts
        .iter()
        .map(|&(t, v)| (table.d4(s * t) / v - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(TimeScaleFit {
        scale: s,
        zeta_eff: op.zeta / s,
        rms_log_residual: (cost(ls) / pts.len() as f64).sqrt(),
        max_rel_dev,
        n_points: pts.len(),
    })
}

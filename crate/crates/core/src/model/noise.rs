use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseDistribution {
    #[default]
    Gaussian,
    /// Symmetric `+1` / `-1`.
    Binary,
}

impl fmt::Display for NoiseDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseDistribution::Gaussian => "gaussian",
            NoiseDistribution::Binary => "binary",
        })
    }
}

impl FromStr for NoiseDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseDistribution::Gaussian),
            "binary" => Ok(NoiseDistribution::Binary),
            other => Err(Error::Parse(format!("unknown noise distribution `{other}`"))),
        }
    }
}

/// One quenched realisation of the couplings `eta_ij`.
///
/// Symmetric with zero diagonal. The seed identifies the realisation; the
/// same `(n, seed, distribution)` always produces the same matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMatrix {
    n: usize,
    seed: u64,
    distribution: NoiseDistribution,
    eta: Vec<f64>,
}

impl NoiseMatrix {
    /// All couplings zero (no disorder).
    pub fn zeros(n: usize) -> Self {
        NoiseMatrix {
            n,
            seed: 0,
            distribution: NoiseDistribution::Gaussian,
            eta: vec![0.0; n * n],
        }
    }

    /// Every off-diagonal coupling set to `c`.
    pub fn constant(n: usize, c: f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m.eta[i * n + j] = c;
                }
            }
        }
        m
    }

    /// Builds a matrix from its strict upper triangle, row-major.
    pub fn from_upper_triangle(
        n: usize,
        seed: u64,
        distribution: NoiseDistribution,
        upper: &[f64],
    ) -> Result<Self> {
        let expected = n * n.saturating_sub(1) / 2;
        if upper.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: upper.len(),
            });
        }
        let mut eta = vec![0.0; n * n];
        let mut it = upper.iter();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = *it.next().expect("length checked above");
                if !v.is_finite() {
                    return Err(Error::Parse(format!("non-finite coupling at ({i}, {j})")));
                }
                eta[i * n + j] = v;
                eta[j * n + i] = v;
            }
        }
        Ok(NoiseMatrix {
            n,
            seed,
            distribution,
            eta,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn distribution(&self) -> NoiseDistribution {
        self.distribution
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.eta[i * self.n + j]
    }

    /// Strict upper triangle, row-major.
    pub fn upper_triangle(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n * self.n.saturating_sub(1) / 2);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                out.push(self.get(i, j));
            }
        }
        out
    }

    /// Relabels sites `i -> n - 1 - i`.
    pub fn reversed(&self) -> Self {
        let n = self.n;
        let mut eta = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                eta[i * n + j] = self.get(n - 1 - i, n - 1 - j);
            }
        }
        NoiseMatrix { eta, ..self.clone() }
    }

    /// Text form: a header line `N seed distribution`, then the strict upper
    /// triangle row-major, one value per line in shortest round-trip decimal.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {} {}\n", self.n, self.seed, self.distribution);
        for v in self.upper_triangle() {
            s.push_str(&format!("{v:?}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty noise file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("bad noise header `{header}`")));
        }
        let n: usize = fields[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad N `{}`", fields[0])))?;
        let seed: u64 = fields[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad seed `{}`", fields[1])))?;
        let distribution: NoiseDistribution = fields[2].parse()?;
        let upper = lines
            .map(|l| {
                l.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad coupling `{l}`")))
            })
            .collect::<Result<Vec<f64>>>()?;
        Self::from_upper_triangle(n, seed, distribution, &upper)
    }
}

/// Draws a fresh realisation with i.i.d. zero-mean, unit-variance couplings.
pub fn generate_noise(n_sites: usize, seed: u64, distribution: NoiseDistribution) -> Result<NoiseMatrix> {
    if n_sites < 2 {
        return Err(Error::InvalidParams(format!(
            "n_sites must be >= 2, got {n_sites}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = n_sites * (n_sites - 1) / 2;
    let upper: Vec<f64> = (0..count)
        .map(|_| match distribution {
            NoiseDistribution::Gaussian => rng.sample(StandardNormal),
            NoiseDistribution::Binary => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        })
        .collect();
    NoiseMatrix::from_upper_triangle(n_sites, seed, distribution, &upper)
}

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{equilibrium_lj_distance, Conformation, ModelParams};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitStyle {
    StraightLine,
    #[default]
    RandomCoil,
    /// Compact walk on a face-centred-cubic lattice.
    FccSeeded,
}

impl fmt::Display for InitStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitStyle::StraightLine => "straight_line",
            InitStyle::RandomCoil => "random_coil",
            InitStyle::FccSeeded => "fcc_seeded",
        })
    }
}

impl FromStr for InitStyle {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "straight_line" => Ok(Self::StraightLine),
            "random_coil" => Ok(Self::RandomCoil),
            "fcc_seeded" => Ok(Self::FccSeeded),
            other => Err(Error::Parse(format!("unknown init style `{other}`"))),
        }
    }
}

/// Bond spacing used for starting conformations: the Lennard-Jones pair
/// minimum when both `A` and `R` are positive, else `1`.
pub fn initial_spacing(params: &ModelParams) -> f64 {
    equilibrium_lj_distance(params).unwrap_or(1.0)
}

pub fn initial_conformation(params: &ModelParams, style: InitStyle, rng_seed: u64) -> Result<Conformation> {
    params.validate()?;
    let n = params.n_sites;
    let spacing = initial_spacing(params);
    let positions = match style {
        InitStyle::StraightLine => (0..n)
            .map(|i| Vec3::new(i as f64 * spacing, 0.0, 0.0))
            .collect(),
        InitStyle::RandomCoil => random_coil(n, spacing, rng_seed),
        InitStyle::FccSeeded => fcc_walk(n, spacing)?,
    };
    Conformation::new(positions)
}

/// Random walk with fixed step length; steps that land closer than
/// `0.9 * spacing` to an earlier site are redrawn (up to a retry cap).
fn random_coil(n: usize, spacing: f64, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![Vec3::zeros()];
    let min_sq = (0.9 * spacing).powi(2);
    while pts.len() < n {
        let last = *pts.last().expect("non-empty");
        let mut cand = last;
        for _ in 0..1000 {
            let dir = loop {
                let v = Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                let nsq = v.norm_squared();
                if nsq > 1e-6 && nsq <= 1.0 {
                    break v / nsq.sqrt();
                }
            };
            cand = last + dir * spacing;
            if pts.iter().all(|p| (p - cand).norm_squared() >= min_sq) {
                break;
            }
        }
        pts.push(cand);
    }
    pts
}

/// The twelve nearest-neighbour vectors of the fcc lattice in integer
/// coordinates (`x + y + z` even).
fn fcc_neighbours() -> Vec<[i32; 3]> {
    let mut v = Vec::with_capacity(12);
    for a in [-1, 1] {
        for b in [-1, 1] {
            v.push([a, b, 0]);
            v.push([a, 0, b]);
            v.push([0, a, b]);
        }
    }
    v
}

fn norm_sq(p: [i32; 3]) -> i32 {
    p[0] * p[0] + p[1] * p[1] + p[2] * p[2]
}

/// Self-avoiding walk of `n` sites on the fcc lattice that stays within the
/// smallest possible radius of the origin. Nearest-neighbour distance is
/// `spacing`.
fn fcc_walk(n: usize, spacing: f64) -> Result<Vec<Vec3>> {
    let nbrs = fcc_neighbours();
    // Shell radii in integer units: |p|^2 = 2 (first shell), 4, 6, 8, ...
    let mut radius_sq = 2;
    loop {
        let mut budget = 2_000_000usize;
        let mut path = vec![[0, 0, 0]];
        let mut used: HashSet<[i32; 3]> = path.iter().copied().collect();
        if dfs(&mut path, &mut used, n, radius_sq, &nbrs, &mut budget) {
            let scale = spacing / 2f64.sqrt();
            return Ok(path
                .into_iter()
                .map(|p| Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64) * scale)
                .collect());
        }
        radius_sq += 2;
        if radius_sq > 2 * (n as i32 + 2) * (n as i32 + 2) {
            return Err(Error::Domain(format!("no fcc walk found for n = {n}")));
        }
    }
}

fn dfs(
    path: &mut Vec<[i32; 3]>,
    used: &mut HashSet<[i32; 3]>,
    n: usize,
    radius_sq: i32,
    nbrs: &[[i32; 3]],
    budget: &mut usize,
) -> bool {
    if path.len() == n {
        return true;
    }
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let last = *path.last().expect("non-empty");
    let mut cands: Vec<[i32; 3]> = nbrs
        .iter()
        .map(|d| [last[0] + d[0], last[1] + d[1], last[2] + d[2]])
        .filter(|p| norm_sq(*p) <= radius_sq && !used.contains(p))
        .collect();
    // Innermost first; the lexicographic tie-break keeps the walk deterministic.
    cands.sort_by_key(|p| (norm_sq(*p), *p));
    for c in cands {
        path.push(c);
        used.insert(c);
        if dfs(path, used, n, radius_sq, nbrs, budget) {
            return true;
        }
        used.remove(&c);
        path.pop();
    }
    false
}

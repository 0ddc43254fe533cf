use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Conformation, Hamiltonian, ModelParams, NoiseMatrix};
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    /// Stop once `max |dH/dr| < tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// L-BFGS history length.
    pub memory: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions { tol: 1e-8, max_iter: 20_000, memory: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub conformation: Conformation,
    pub energy: f64,
    pub grad_inf: f64,
    pub iterations: usize,
}

/// Descend to `|grad H|_inf < tol` with default options.
pub fn local_minimize(conf: &Conformation, params: &ModelParams, noise: &NoiseMatrix, tol: f64) -> Result<Conformation> {
    let opts = MinimizeOptions { tol, ..Default::default() };
    Ok(local_minimize_with(conf, params, noise, &opts)?.conformation)
}

fn flatten(g: &[Vec3]) -> Vec<f64> {
    g.iter().flat_map(|v| [v.x, v.y, v.z]).collect()
}

fn shifted(x: &[Vec3], dir: &[f64], step: f64) -> Vec<Vec3> {
    x.iter()
        .enumerate()
        .map(|(i, p)| p + Vec3::new(dir[3 * i], dir[3 * i + 1], dir[3 * i + 2]) * step)
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

// Coincidence guard: anything within this factor of the floor is treated as
// a collapse rather than a minimum.
const COLLAPSE_FACTOR: f64 = 1e3;

/// L-BFGS with an Armijo backtracking line search. A chain that collapses
/// onto itself (possible without repulsion) is reported as
/// [`Error::Degenerate`].
pub fn local_minimize_with(
    conf: &Conformation,
    params: &ModelParams,
    noise: &NoiseMatrix,
    opts: &MinimizeOptions,
) -> Result<Minimum> {
    params.validate()?;
    let ham = Hamiltonian::new(params, noise)?;
    let collapse = params.d_min * COLLAPSE_FACTOR;
    let degenerate = |c: &Conformation| -> Option<Error> {
        let (i, j, d) = c.min_pair_distance();
        (d < collapse).then(|| {
            Error::Degenerate(format!("sites {i} and {j} collapsed to distance {d:e}"))
        })
    };
    let mut x = conf.positions().to_vec();
    let mut energy = ham.total(conf)?;
    let mut g = flatten(&ham.gradient(conf)?);
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    for iter in 0..=opts.max_iter {
        let gi = inf_norm(&g);
        if gi < opts.tol {
            let c = Conformation::new(x)?;
            if let Some(e) = degenerate(&c) {
                return Err(e);
            }
            return Ok(Minimum { conformation: c, energy, grad_inf: gi, iterations: iter });
        }
        if iter == opts.max_iter {
            return Err(Error::NonConvergence { iterations: iter, grad_norm: gi });
        }
        // Two-loop recursion.
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        } else {
            // First step: cap the largest displacement at 0.1.
            let scale = 0.1 / gi;
            q.iter_mut().for_each(|v| *v *= scale);
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&dir, &g);
        if slope >= 0.0 {
            hist.clear();
            let scale = 0.1 / gi;
            dir = g.iter().map(|v| -v * scale).collect();
            slope = dot(&dir, &g);
        }
        // Backtracking; singular trial points count as failed steps.
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = shifted(&x, &dir, step);
            let c = Conformation::new(trial.clone())?;
            match ham.total(&c) {
                Ok(e) if e <= energy + 1e-4 * step * slope => {
                    accepted = Some((trial, c, e));
                    break;
                }
                // Near the bottom the energy change drowns in rounding;
                // fall back to asking for a smaller gradient.
                Ok(e) if e - energy <= 1e-13 * energy.abs().max(1.0)
                    && ham.gradient(&c).is_ok_and(|ng| inf_norm(&flatten(&ng)) < gi) =>
                {
                    accepted = Some((trial, c, e));
                    break;
                }
                Ok(_) | Err(Error::Singular { .. }) => step *= 0.5,
                Err(e) => return Err(e),
            }
        }
        let Some((nx, c, ne)) = accepted else {
            let cur = Conformation::new(x)?;
            if let Some(e) = degenerate(&cur) {
                return Err(e);
            }
            return Err(Error::NonConvergence { iterations: iter, grad_norm: gi });
        };
        if let Some(e) = degenerate(&c) {
            return Err(e);
        }
        let ng = match ham.gradient(&c) {
            Ok(v) => flatten(&v),
            Err(Error::Singular { .. }) => return Err(degenerate(&c).unwrap_or(Error::Degenerate("collapsed".into()))),
            Err(e) => return Err(e),
        };
        let s: Vec<f64> = dir.iter().map(|d| d * step).collect();
        let y: Vec<f64> = ng.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            hist.push_back((s, y, 1.0 / sy));
            if hist.len() > opts.memory {
                hist.pop_front();
            }
        }
        x = nx;
        energy = ne;
        g = ng;
    }
    unreachable!("loop returns")
}

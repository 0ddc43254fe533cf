use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::OracleParams;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::model::Conformation;
use crate::Vec3;

/// Output of [`langevin_toy_integrator`]. Snapshot times in the trajectory
/// are integration step counts; multiply by `dt` for physical time.
#[derive(Debug, Clone)]
pub struct LangevinRun {
    pub dt: f64,
    pub trajectory: Trajectory,
}

impl LangevinRun {
    pub fn physical_time(&self, step: u64) -> f64 {
        step as f64 * self.dt
    }
}

/// Euler-Maruyama integration of overdamped Langevin dynamics for the
/// harmonic chain `H = h sum |r_{i+1} - r_i|^2`:
///
/// ```text
/// r_i += -(dt / zeta) dH/dr_i + sqrt(2 T dt / zeta) xi_i
/// ```
///
/// The chain starts from an exact equilibrium draw (independent Gaussian
/// bonds of variance `T / 2h` per component). At `T = 0` it starts from a
/// unit-spaced straight line and relaxes deterministically. A snapshot is
/// recorded every `record_every` steps, starting with step 0.
pub fn langevin_toy_integrator(
    op: &OracleParams,
    dt: f64,
    steps: u64,
    record_every: u64,
    seed: u64,
) -> Result<LangevinRun> {
    op.validate()?;
    let limit = op.zeta / (4.0 * op.h);
    if !(dt > 0.0 && dt < limit) {
        return Err(Error::Stability { dt, limit });
    }
    if record_every == 0 {
        return Err(Error::InvalidParams("record_every must be >= 1".into()));
    }
    let n = op.n_sites;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut pos = vec![Vec3::zeros(); n];
    if op.temperature > 0.0 {
        let sd = (op.temperature / (2.0 * op.h)).sqrt();
        for i in 1..n {
            pos[i] = pos[i - 1] + Vec3::new(gauss(), gauss(), gauss()) * sd;
        }
    } else {
        for (i, p) in pos.iter_mut().enumerate() {
            p.x = i as f64;
        }
    }
    let drift = dt / op.zeta;
    let kick = (2.0 * op.temperature * dt / op.zeta).sqrt();
    let mut force = vec![Vec3::zeros(); n];
    let mut snapshots = Vec::with_capacity((steps / record_every + 1) as usize);
    for step in 0..=steps {
        if step % record_every == 0 {
            snapshots.push((step, Conformation::new(pos.clone())?));
        }
        if step == steps {
            break;
        }
        // -dH/dr_i = 2h (r_{i-1} - r_i) + 2h (r_{i+1} - r_i)
        force.iter_mut().for_each(|f| *f = Vec3::zeros());
        for i in 0..n - 1 {
            let b = (pos[i + 1] - pos[i]) * (2.0 * op.h);
            force[i] += b;
            force[i + 1] -= b;
        }
        for i in 0..n {
            pos[i] += force[i] * drift;
            if kick > 0.0 {
                pos[i] += Vec3::new(gauss(), gauss(), gauss()) * kick;
            }
        }
    }
    Ok(LangevinRun {
        dt,
        trajectory: Trajectory {
            snapshots,
            energy_series: vec![],
            acceptance_rate: 1.0,
            trial_radius: 0.0,
            record_stride: record_every,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{laplacian_eigenvalue, normal_mode_transform};

    #[test]
    fn stability_limit_enforced() {
        let op = OracleParams::harmonic(8, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            langevin_toy_integrator(&op, 0.25, 10, 1, 0),
            Err(Error::Stability { .. })
        ));
        assert!(langevin_toy_integrator(&op, 0.2, 10, 1, 0).is_ok());
    }

    #[test]
    fn zero_temperature_collapses() {
        let op = OracleParams::harmonic(8, 1.0, 0.0, 1.0).unwrap();
        let run = langevin_toy_integrator(&op, 0.05, 20_000, 20_000, 0).unwrap();
        let last = &run.trajectory.snapshots.last().unwrap().1;
        assert!(last.mean_bond_sq() < 1e-20);
        // Centre of mass is conserved by internal forces.
        assert!((last.center_of_mass().x - 3.5).abs() < 1e-9);
        let again = langevin_toy_integrator(&op, 0.05, 100, 10, 99).unwrap();
        let other = langevin_toy_integrator(&op, 0.05, 100, 10, 5).unwrap();
        assert_eq!(again.trajectory.snapshots, other.trajectory.snapshots);
    }

    #[test]
    fn mode_equipartition() {
        let (n, h, temp) = (8, 1.0, 1.0);
        let op = OracleParams::harmonic(n, h, temp, 1.0).unwrap();
        // Small step keeps the Euler-Maruyama variance bias of the stiffest
        // mode (about h mu dt / zeta) well under a percent.
        let dt = 0.002;
        let mut acc = vec![0.0; n];
        let mut count = 0.0;
        for seed in 0..16 {
            let run = langevin_toy_integrator(&op, dt, 200_000, 100, seed).unwrap();
            for (_, c) in &run.trajectory.snapshots {
                let x = normal_mode_transform(c);
                for p in 1..n {
                    acc[p] += x[p].norm_squared() / 3.0;
                }
                count += 1.0;
            }
        }
        for p in 1..n {
            let expect = temp / (2.0 * h * laplacian_eigenvalue(p, n)) / (2 * n) as f64;
            let got = acc[p] / count;
            assert!((got / expect - 1.0).abs() < 0.05, "mode {p}: {got} vs {expect}");
        }
    }
}

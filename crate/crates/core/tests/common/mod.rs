#![allow(dead_code)]

use std::collections::BTreeMap;

use hetchain::dynamics::{run_with_sink, Simulation, SnapshotSink};
use hetchain::model::{Conformation, Hamiltonian, ModelParams, NoiseMatrix};
use hetchain::{DynamicsConfig, MoveDistribution, Result, Vec3};
use statrs::distribution::{ChiSquared, ContinuousCDF};

struct BondSink(Vec<Vec3>);

impl SnapshotSink for BondSink {
    fn record(&mut self, _t: u64, conf: &Conformation, _ham: &Hamiltonian) -> Result<()> {
        self.0.push(conf.position(1) - conf.position(0));
        Ok(())
    }
}

pub fn sample_bonds(params: &ModelParams, cfg: &DynamicsConfig, start: Vec3) -> Vec<Vec3> {
    let init = Conformation::new(vec![Vec3::zeros(), start]).unwrap();
    let noise = NoiseMatrix::zeros(2);
    let mut sim = Simulation::new(init, params, &noise, cfg).unwrap();
    let mut sink = BondSink(vec![]);
    run_with_sink(&mut sim, &mut sink).unwrap();
    sink.0
}

/// Pearson statistic after merging trailing bins until every expected count
/// is at least 5. Returns `(statistic, degrees of freedom)`.
pub fn pearson(observed: &[f64], expected: &[f64]) -> (f64, usize) {
    let (mut o, mut e) = (vec![], vec![]);
    let (mut co, mut ce) = (0.0, 0.0);
    for (a, b) in observed.iter().zip(expected) {
        co += a;
        ce += b;
        if ce >= 5.0 {
            o.push(co);
            e.push(ce);
            co = 0.0;
            ce = 0.0;
        }
    }
    if let (Some(lo), Some(le)) = (o.last_mut(), e.last_mut()) {
        *lo += co;
        *le += ce;
    }
    let stat = o.iter().zip(&e).map(|(a, b)| (a - b).powi(2) / b).sum();
    (stat, o.len() - 1)
}

pub fn critical(dof: usize) -> f64 {
    ChiSquared::new(dof as f64).unwrap().inverse_cdf(0.99)
}

/// Two sites on a cubic lattice under a harmonic bond plus a Lennard-Jones
/// pair. Returns the Pearson statistic of the sampled shell occupancies
/// against exhaustive enumeration, its degrees of freedom and the 1% critical
/// value.
pub fn lattice_chi2(seed: u64) -> (f64, usize, f64) {
    let a = 0.5;
    let params = ModelParams::new(2, 1.0, 0.5, 0.1, 0.0, 1.0);
    let cfg = DynamicsConfig {
        trial_radius: a,
        move_distribution: MoveDistribution::LatticeStep,
        tune_trial_radius: false,
        sweeps_thermalize: Some(1_000),
        sweeps_measure: 400_000,
        record_stride: 20,
        acceptance_bounds: None,
        rng_seed: seed,
        ..Default::default()
    };
    let bonds = sample_bonds(&params, &cfg, Vec3::new(2.0 * a, 0.0, 0.0));

    // Occupancy of each shell m = |d/a|^2.
    let mut obs: BTreeMap<i64, f64> = BTreeMap::new();
    for d in &bonds {
        let g = d / a;
        let k = [g.x.round(), g.y.round(), g.z.round()];
        assert!((g - Vec3::new(k[0], k[1], k[2])).norm() < 1e-9, "left the lattice");
        *obs.entry((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as i64).or_default() += 1.0;
    }

    // The box is large enough that the neglected tail is below 1e-20.
    let ham = Hamiltonian::new(&params, &NoiseMatrix::zeros(2)).unwrap();
    let kmax = 12i64;
    let mut weight: BTreeMap<i64, f64> = BTreeMap::new();
    for i in -kmax..=kmax {
        for j in -kmax..=kmax {
            for k in -kmax..=kmax {
                let d = Vec3::new(i as f64, j as f64, k as f64) * a;
                let conf = Conformation::new(vec![Vec3::zeros(), d]).unwrap();
                if let Ok(e) = ham.total(&conf) {
                    *weight.entry(i * i + j * j + k * k).or_default() += (-params.beta * e).exp();
                }
            }
        }
    }
    let z: f64 = weight.values().sum();
    let n = bonds.len() as f64;
    assert!(obs.keys().all(|m| weight.contains_key(m)));
    let o: Vec<f64> = weight.keys().map(|m| obs.get(m).copied().unwrap_or(0.0)).collect();
    let e: Vec<f64> = weight.values().map(|w| n * w / z).collect();
    let (stat, dof) = pearson(&o, &e);
    (stat, dof, critical(dof))
}

/// Bond samples of a 2-site harmonic chain mapped through the chi2(3) CDF.
pub fn harmonic_bond_uniforms(seed: u64) -> Vec<f64> {
    let (h, beta) = (1.0, 1.0);
    let params = ModelParams::harmonic(2, h, beta);
    let cfg = DynamicsConfig {
        sweeps_thermalize: Some(2_000),
        sweeps_measure: 400_000,
        record_stride: 20,
        rng_seed: seed,
        ..Default::default()
    };
    let reference = ChiSquared::new(3.0).unwrap();
    sample_bonds(&params, &cfg, Vec3::new(1.0, 0.0, 0.0))
        .iter()
        .map(|d| reference.cdf(2.0 * beta * h * d.norm_squared()))
        .collect()
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DynamicsConfig;
use crate::error::{Error, Result};
use crate::model::{Conformation, Hamiltonian, ModelParams, NoiseMatrix};
use crate::Vec3;

/// Metropolis rule: accept with probability `min(1, exp(-beta * delta_e))`
/// given a uniform variate `u` in `[0, 1)`.
#[inline]
pub fn metropolis_accept(delta_e: f64, beta: f64, u: f64) -> bool {
    delta_e <= 0.0 || u < (-beta * delta_e).exp()
}

/// Sweeps per tuning block during thermalisation.
const TUNE_BLOCK: u64 = 100;

/// A single Markov chain: conformation, tracked energy, RNG and clock.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub(crate) params: ModelParams,
    pub(crate) ham: Hamiltonian,
    pub(crate) config: DynamicsConfig,
    pub(crate) conf: Conformation,
    pub(crate) energy: f64,
    pub(crate) rng: ChaCha8Rng,
    pub(crate) mc_time: u64,
    pub(crate) trial_radius: f64,
    pub(crate) proposed: u64,
    pub(crate) accepted: u64,
    pub(crate) since_resync: u64,
}

impl Simulation {
    pub fn new(
        initial: Conformation,
        params: &ModelParams,
        noise: &NoiseMatrix,
        config: &DynamicsConfig,
    ) -> Result<Self> {
        config.validate()?;
        let ham = Hamiltonian::new(params, noise)?;
        let energy = ham.total(&initial)?;
        Ok(Simulation {
            params: params.clone(),
            ham,
            config: config.clone(),
            conf: initial,
            energy,
            rng: ChaCha8Rng::seed_from_u64(config.rng_seed),
            mc_time: 0,
            trial_radius: config.trial_radius,
            proposed: 0,
            accepted: 0,
            since_resync: 0,
        })
    }

    pub fn conformation(&self) -> &Conformation {
        &self.conf
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.ham
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn config(&self) -> &DynamicsConfig {
        &self.config
    }

    /// Incrementally tracked total energy.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Sweeps performed since construction.
    pub fn mc_time(&self) -> u64 {
        self.mc_time
    }

    pub fn trial_radius(&self) -> f64 {
        self.trial_radius
    }

    /// Acceptance rate since the last [`reset_counters`](Self::reset_counters).
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    pub fn reset_counters(&mut self) {
        self.proposed = 0;
        self.accepted = 0;
    }

    /// One Metropolis proposal on `site`. Rejected moves leave the
    /// conformation untouched; a proposal that would bring two sites below
    /// the coincidence floor counts as rejected.
    pub fn metropolis_step(&mut self, site: usize) -> bool {
        let delta = self
            .config
            .move_distribution
            .sample(self.trial_radius, &mut self.rng);
        self.proposed += 1;
        let de = match self.ham.delta(self.conf.positions(), site, &delta) {
            Ok(de) => de,
            Err(_) => return false,
        };
        let accept = if self.config.accept_all {
            true
        } else if de <= 0.0 {
            true
        } else {
            let u: f64 = self.rng.random();
            metropolis_accept(de, self.params.beta, u)
        };
        if accept {
            self.conf.positions_mut()[site] += delta;
            self.energy += de;
            self.accepted += 1;
        }
        accept
    }

    /// `N` proposals, sites in order `0..N` unless random order is enabled.
    /// Returns the number accepted.
    pub fn sweep(&mut self) -> usize {
        let n = self.conf.n_sites();
        let mut accepted = 0;
        for k in 0..n {
            let site = if self.config.random_site_order {
                self.rng.random_range(0..n)
            } else {
                k
            };
            if self.metropolis_step(site) {
                accepted += 1;
            }
        }
        self.mc_time += 1;
        self.since_resync += 1;
        if self.since_resync >= self.config.resync_interval {
            self.resync_energy();
        }
        accepted
    }

    pub fn run_sweeps(&mut self, sweeps: u64) {
        for _ in 0..sweeps {
            self.sweep();
        }
    }

    /// Replaces the tracked energy by a fresh evaluation.
    pub fn resync_energy(&mut self) {
        // The tracked conformation never violates the floor: moves that
        // would are rejected before being applied.
        self.energy = self
            .ham
            .total(&self.conf)
            .expect("accepted moves keep the conformation non-singular");
        self.since_resync = 0;
    }

    /// Thermalises for `sweeps` sweeps, tuning the trial radius in blocks of
    /// 100 sweeps when enabled. Returns the acceptance rate of the last block.
    pub fn thermalize(&mut self, sweeps: u64) -> f64 {
        let tune = self.config.tune_trial_radius && !self.config.accept_all;
        let (lo, hi) = self.config.target_acceptance;
        let target = 0.5 * (lo + hi);
        let mut done = 0;
        let mut last_rate = f64::NAN;
        while done < sweeps {
            let block = TUNE_BLOCK.min(sweeps - done);
            self.reset_counters();
            self.run_sweeps(block);
            done += block;
            last_rate = self.acceptance_rate();
            if tune && (last_rate < lo || last_rate > hi) {
                let factor = ((last_rate + 0.05) / (target + 0.05)).clamp(0.7, 1.3);
                self.trial_radius *= factor;
            }
        }
        self.reset_counters();
        last_rate
    }

    /// Acceptance-band check used after thermalisation and measurement.
    pub(crate) fn check_acceptance(&self, rate: f64) -> Result<()> {
        if self.config.accept_all || rate.is_nan() {
            return Ok(());
        }
        if let Some((lo, hi)) = self.config.acceptance_bounds {
            if rate < lo || rate > hi {
                return Err(Error::AcceptanceOutOfRange {
                    rate,
                    lo,
                    hi,
                    trial_radius: self.trial_radius,
                });
            }
        }
        Ok(())
    }

    /// Moves `site` to `at` unconditionally (used by tests and grid checks).
    pub fn set_site(&mut self, site: usize, at: Vec3) -> Result<()> {
        let delta = at - self.conf.position(site);
        let de = self.ham.delta(self.conf.positions(), site, &delta)?;
        self.conf.positions_mut()[site] = at;
        self.energy += de;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{initial_conformation, InitStyle};

    fn lj_setup(beta: f64) -> (ModelParams, NoiseMatrix, DynamicsConfig) {
        let p = ModelParams::new(10, 1.0, 2.7, 2.0, 3.0, beta);
        let noise = crate::model::generate_noise(10, 4, crate::model::NoiseDistribution::Gaussian).unwrap();
        let cfg = DynamicsConfig {
            trial_radius: 0.3,
            rng_seed: 9,
            ..Default::default()
        };
        (p, noise, cfg)
    }

    #[test]
    fn downhill_always_accepted() {
        for u in [0.0, 0.5, 0.999_999] {
            assert!(metropolis_accept(-1.0, 1.0, u));
            assert!(metropolis_accept(0.0, 1.0, u));
        }
        assert!(!metropolis_accept(10.0, 1.0, 0.5));
        assert!(metropolis_accept(1.0, 1.0, 0.3));
    }

    #[test]
    fn sweep_makes_n_proposals() {
        let (p, noise, cfg) = lj_setup(1.0);
        let init = initial_conformation(&p, InitStyle::StraightLine, 0).unwrap();
        let mut sim = Simulation::new(init, &p, &noise, &cfg).unwrap();
        sim.sweep();
        assert_eq!(sim.proposed, 10);
        assert_eq!(sim.mc_time(), 1);
    }

    #[test]
    fn rejected_moves_leave_state_bit_identical() {
        let (p, noise, cfg) = lj_setup(1.0);
        let init = initial_conformation(&p, InitStyle::StraightLine, 0).unwrap();
        let mut sim = Simulation::new(init, &p, &noise, &cfg).unwrap();
        for k in 0..2_000 {
            let before = sim.conformation().clone();
            let e = sim.energy();
            if !sim.metropolis_step(k % 10) {
                assert_eq!(sim.conformation(), &before);
                assert_eq!(sim.energy().to_bits(), e.to_bits());
            }
        }
    }

    #[test]
    fn accept_all_is_free_walk() {
        let p = ModelParams::harmonic(5, 1.0, 1.0);
        let cfg = DynamicsConfig {
            accept_all: true,
            trial_radius: 2.0,
            ..Default::default()
        };
        let init = initial_conformation(&p, InitStyle::StraightLine, 0).unwrap();
        let mut sim = Simulation::new(init, &p, &NoiseMatrix::zeros(5), &cfg).unwrap();
        sim.run_sweeps(100);
        assert_eq!(sim.acceptance_rate(), 1.0);
    }

    #[test]
    fn frozen_at_huge_beta() {
        // Two LJ sites at the pair minimum: every move is uphill.
        let p = ModelParams::new(2, 0.0, 2.0, 1.0, 0.0, 1e9);
        let init = Conformation::from_coords(&[[0.0; 3], [1.0, 0.0, 0.0]]).unwrap();
        let cfg = DynamicsConfig {
            trial_radius: 0.1,
            ..Default::default()
        };
        let mut sim = Simulation::new(init, &p, &NoiseMatrix::zeros(2), &cfg).unwrap();
        let accepted: usize = (0..500).map(|_| sim.sweep()).sum();
        assert_eq!(accepted, 0);
    }

    #[test]
    fn identical_seeds_identical_chains() {
        let (p, noise, cfg) = lj_setup(1.0);
        let init = initial_conformation(&p, InitStyle::StraightLine, 0).unwrap();
        let mut a = Simulation::new(init.clone(), &p, &noise, &cfg).unwrap();
        let mut b = Simulation::new(init, &p, &noise, &cfg).unwrap();
        a.thermalize(300);
        b.thermalize(300);
        a.run_sweeps(500);
        b.run_sweeps(500);
        assert_eq!(a.conformation(), b.conformation());
        assert_eq!(a.energy().to_bits(), b.energy().to_bits());
    }

    #[test]
    fn tracked_energy_matches_recompute() {
        let (p, noise, mut cfg) = lj_setup(1.0);
        cfg.resync_interval = u64::MAX;
        let init = initial_conformation(&p, InitStyle::StraightLine, 0).unwrap();
        let mut sim = Simulation::new(init, &p, &noise, &cfg).unwrap();
        sim.thermalize(2_000);
        sim.run_sweeps(20_000);
        let fresh = sim.hamiltonian().total(sim.conformation()).unwrap();
        assert!((sim.energy() - fresh).abs() <= 1e-6 * fresh.abs().max(1.0));
    }

    #[test]
    fn tuning_reaches_target_band() {
        let (p, noise, mut cfg) = lj_setup(1.0);
        cfg.trial_radius = 3.0;
        let init = initial_conformation(&p, InitStyle::StraightLine, 0).unwrap();
        let mut sim = Simulation::new(init, &p, &noise, &cfg).unwrap();
        sim.thermalize(5_000);
        sim.run_sweeps(2_000);
        let rate = sim.acceptance_rate();
        assert!((0.3..0.7).contains(&rate), "rate {rate}");
    }
}

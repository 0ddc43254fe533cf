use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{DynamicsConfig, Simulation};
use crate::error::{Error, Result};
use crate::model::{generate_noise, Conformation, Hamiltonian, ModelParams, NoiseDistribution, NoiseMatrix};
use crate::Vec3;

const MAGIC: &str = "# hetchain checkpoint v1";

/// Complete state of a [`Simulation`] between two sweeps.
///
/// Text layout: a magic line, `key = value` header lines (parameters and
/// configuration as JSON, RNG position, clock, counters), a `coordinates`
/// line, then one `x y z` line per site in shortest round-trip decimal.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub config: DynamicsConfig,
    pub noise_seed: u64,
    pub noise_distribution: NoiseDistribution,
    pub mc_time: u64,
    pub trial_radius: f64,
    pub energy: f64,
    pub rng_word_pos: u128,
    pub proposed: u64,
    pub accepted: u64,
    pub since_resync: u64,
    pub conformation: Conformation,
}

impl Checkpoint {
    pub fn capture(sim: &Simulation, noise: &NoiseMatrix) -> Self {
        Checkpoint {
            params: sim.params.clone(),
            config: sim.config.clone(),
            noise_seed: noise.seed(),
            noise_distribution: noise.distribution(),
            mc_time: sim.mc_time,
            trial_radius: sim.trial_radius,
            energy: sim.energy,
            rng_word_pos: sim.rng.get_word_pos(),
            proposed: sim.proposed,
            accepted: sim.accepted,
            since_resync: sim.since_resync,
            conformation: sim.conf.clone(),
        }
    }

    /// Regenerates the quenched couplings: zero when `epsilon == 0`, else
    /// from the stored seed and distribution.
    pub fn noise(&self) -> Result<NoiseMatrix> {
        if self.params.epsilon == 0.0 {
            Ok(NoiseMatrix::zeros(self.params.n_sites))
        } else {
            generate_noise(self.params.n_sites, self.noise_seed, self.noise_distribution)
        }
    }

    /// Rebuilds the simulation so that it continues bit-exactly.
    pub fn restore(&self) -> Result<Simulation> {
        let noise = self.noise()?;
        let ham = Hamiltonian::new(&self.params, &noise)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.rng_seed);
        rng.set_word_pos(self.rng_word_pos);
        Ok(Simulation {
            params: self.params.clone(),
            ham,
            config: self.config.clone(),
            conf: self.conformation.clone(),
            energy: self.energy,
            rng,
            mc_time: self.mc_time,
            trial_radius: self.trial_radius,
            proposed: self.proposed,
            accepted: self.accepted,
            since_resync: self.since_resync,
        })
    }

    pub fn to_text(&self) -> Result<String> {
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "params = {}", serde_json::to_string(&self.params)?);
        let _ = writeln!(s, "config = {}", serde_json::to_string(&self.config)?);
        let _ = writeln!(s, "seed = {}", self.config.rng_seed);
        let _ = writeln!(s, "noise = {} {}", self.noise_seed, self.noise_distribution);
        let _ = writeln!(s, "mc_time = {}", self.mc_time);
        let _ = writeln!(s, "trial_radius = {:?}", self.trial_radius);
        let _ = writeln!(s, "energy = {:?}", self.energy);
        let _ = writeln!(s, "rng_word_pos = {}", self.rng_word_pos);
        let _ = writeln!(s, "counters = {} {} {}", self.proposed, self.accepted, self.since_resync);
        let _ = writeln!(s, "coordinates = {}", self.conformation.n_sites());
        for p in self.conformation.positions() {
            let _ = writeln!(s, "{:?} {:?} {:?}", p[0], p[1], p[2]);
        }
        Ok(s)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(MAGIC) {
            return Err(Error::Parse("not a hetchain checkpoint".into()));
        }
        let mut header = std::collections::HashMap::new();
        let mut n_coords = None;
        for line in lines.by_ref() {
            let (k, v) = line
                .split_once(" = ")
                .ok_or_else(|| Error::Parse(format!("bad header line `{line}`")))?;
            if k == "coordinates" {
                n_coords = Some(parse::<usize>(v)?);
                break;
            }
            header.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| {
            header
                .get(k)
                .map(String::as_str)
                .ok_or_else(|| Error::Parse(format!("missing `{k}`")))
        };
        let params: ModelParams = serde_json::from_str(get("params")?)?;
        let config: DynamicsConfig = serde_json::from_str(get("config")?)?;
        let (noise_seed, noise_dist) = get("noise")?
            .split_once(' ')
            .ok_or_else(|| Error::Parse("bad noise line".into()))?;
        let counters: Vec<u64> = get("counters")?
            .split_whitespace()
            .map(parse::<u64>)
            .collect::<Result<_>>()?;
        if counters.len() != 3 {
            return Err(Error::Parse("bad counters line".into()));
        }
        let n = n_coords.ok_or_else(|| Error::Parse("missing coordinates".into()))?;
        let positions = lines
            .take(n)
            .map(|l| {
                let v: Vec<f64> = l.split_whitespace().map(parse::<f64>).collect::<Result<_>>()?;
                if v.len() != 3 {
                    return Err(Error::Parse(format!("bad coordinate line `{l}`")));
                }
                Ok(Vec3::new(v[0], v[1], v[2]))
            })
            .collect::<Result<Vec<_>>>()?;
        if positions.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: positions.len(),
            });
        }
        Ok(Checkpoint {
            params,
            config,
            noise_seed: parse(noise_seed)?,
            noise_distribution: noise_dist.parse()?,
            mc_time: parse(get("mc_time")?)?,
            trial_radius: parse(get("trial_radius")?)?,
            energy: parse(get("energy")?)?,
            rng_word_pos: parse(get("rng_word_pos")?)?,
            proposed: counters[0],
            accepted: counters[1],
            since_resync: counters[2],
            conformation: Conformation::new(positions)?,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        crate::campaign::write_atomic(path, self.to_text()?.as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("cannot parse `{s}`")))
}

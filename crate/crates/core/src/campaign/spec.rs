use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::FitOptions;
use crate::dynamics::{DynamicsConfig, InitStyle};
use crate::error::{Error, Result};
use crate::model::{ModelParams, NoiseDistribution};

/// A full ensemble description: one model template, the axes swept over, and
/// what to measure. Parsed from TOML with one table per section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSpec {
    pub name: String,
    /// Template; `epsilon`, `h`, `beta` and `n_sites` are overridden by the
    /// corresponding lists in `[campaign]` when those are given.
    pub model: ModelParams,
    #[serde(default)]
    pub dynamics: DynamicsConfig,
    pub campaign: CampaignSection,
    #[serde(default)]
    pub observables: ObservableSection,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub references: Vec<Reference>,
    #[serde(default)]
    pub checks: Vec<Check>,
    /// Values that were filled in by default rather than chosen; copied into
    /// the manifest.
    #[serde(default)]
    pub assumptions: Vec<String>,
    /// Not part of the configuration hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignSection {
    pub epsilon_list: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_sites_list: Option<Vec<usize>>,
    pub n_noise_realizations: usize,
    pub n_seeds_per_noise: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub noise_distribution: NoiseDistribution,
    #[serde(default)]
    pub init_style: InitStyle,
    /// Fraction of jobs per point that must succeed before it is aggregated.
    #[serde(default = "default_min_success")]
    pub min_success_fraction: f64,
}

fn default_min_success() -> f64 {
    0.8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservableSection {
    pub lags_per_decade: usize,
    /// Largest lag in sweeps; `None` means half the measurement length.
    pub max_lag: Option<u64>,
    /// Recorded snapshots between time origins.
    pub origin_every: u64,
    /// Recorded snapshots between structural samples.
    pub structure_every: u64,
    /// Lag (sweeps) at which `D4` samples are collected for a histogram.
    pub fixed_lag: Option<u64>,
    pub histogram_bins: Option<usize>,
}

impl Default for ObservableSection {
    fn default() -> Self {
        ObservableSection {
            lags_per_decade: 30,
            max_lag: None,
            origin_every: 10,
            structure_every: 10,
            fixed_lag: None,
            histogram_bins: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSection {
    pub skip_factor: f64,
    pub plateau_fraction: f64,
    pub slope_tolerance: f64,
    pub min_points: usize,
    pub bootstrap_resamples: usize,
}

impl Default for FitSection {
    fn default() -> Self {
        let o = FitOptions::default();
        FitSection {
            skip_factor: o.skip_factor,
            plateau_fraction: o.plateau_fraction,
            slope_tolerance: o.slope_tolerance,
            min_points: o.min_points,
            bootstrap_resamples: 200,
        }
    }
}

impl FitSection {
    pub fn options(&self) -> FitOptions {
        FitOptions {
            skip_factor: self.skip_factor,
            plateau_fraction: self.plateau_fraction,
            slope_tolerance: self.slope_tolerance,
            min_points: self.min_points,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    /// `A = R = eps = 0` at the template's `N`, `h` and `beta`.
    Harmonic,
    /// No interactions; every move accepted.
    FreeParticle,
}

/// Extra series simulated alongside the main points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reference {
    pub kind: ReferenceKind,
    pub n_seeds: usize,
}

/// Pass/fail statements evaluated after aggregation. Points are addressed by
/// their label (see [`CampaignSpec::points`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    /// `|nu - target| <= tol`.
    NuWithin { label: String, target: f64, tol: f64 },
    /// The two exponents agree within two combined standard errors.
    NuIndistinguishable { a: String, b: String },
    /// Exponent is weakly decreasing in epsilon over the main points.
    NuDecreasingInEpsilon,
    /// Median of the fixed-lag `D4` samples strictly decreases with epsilon.
    MedianDecreasingInEpsilon,
    /// Exponents of the individual noise realisations agree.
    NoiseIndependence { label: String },
    /// Mean squared bond within `band` of `target`.
    BondSqWithin { label: String, target: f64, band: f64 },
    /// The exact harmonic curve matches the measured one within `max_rel_dev`
    /// inside the fitted scaling window.
    OracleOverlay { label: String, max_rel_dev: f64 },
}

/// One combination of swept parameters (or a reference series).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub label: String,
    pub params: ModelParams,
    pub reference: Option<ReferenceKind>,
    pub n_noise: usize,
    pub n_seeds: usize,
}

impl CampaignSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: CampaignSpec = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&super::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.campaign;
        if c.epsilon_list.is_empty() {
            return Err(Error::InvalidParams("epsilon_list is empty".into()));
        }
        if c.n_noise_realizations == 0 || c.n_seeds_per_noise == 0 {
            return Err(Error::InvalidParams("need at least one noise realisation and one seed".into()));
        }
        if !(0.0..=1.0).contains(&c.min_success_fraction) {
            return Err(Error::InvalidParams("min_success_fraction must lie in [0, 1]".into()));
        }
        if self.observables.origin_every == 0 || self.observables.structure_every == 0 {
            return Err(Error::InvalidParams("origin_every and structure_every must be >= 1".into()));
        }
        self.dynamics.validate()?;
        for p in self.points() {
            p.params.validate()?;
        }
        let labels: Vec<String> = self.points().into_iter().map(|p| p.label).collect();
        for chk in &self.checks {
            let named: Vec<&String> = match chk {
                Check::NuWithin { label, .. }
                | Check::NoiseIndependence { label }
                | Check::BondSqWithin { label, .. }
                | Check::OracleOverlay { label, .. } => vec![label],
                Check::NuIndistinguishable { a, b } => vec![a, b],
                _ => vec![],
            };
            if let Some(bad) = named.into_iter().find(|l| !labels.contains(l)) {
                return Err(Error::InvalidParams(format!("check refers to unknown point `{bad}`")));
            }
        }
        Ok(())
    }

    /// Main points in `n_sites`, `beta`, `h`, `epsilon` order (epsilon
    /// varying fastest, in list order), then references.
    pub fn points(&self) -> Vec<Point> {
        let c = &self.campaign;
        let m = &self.model;
        let ns = c.n_sites_list.clone().unwrap_or_else(|| vec![m.n_sites]);
        let betas = c.beta_list.clone().unwrap_or_else(|| vec![m.beta]);
        let hs = c.h_list.clone().unwrap_or_else(|| vec![m.h]);
        let mut out = Vec::new();
        for &n in &ns {
            for &beta in &betas {
                for &h in &hs {
                    for &eps in &c.epsilon_list {
                        let params = ModelParams { n_sites: n, beta, h, epsilon: eps, ..m.clone() };
                        out.push(Point {
                            label: point_label(&params),
                            params,
                            reference: None,
                            n_noise: c.n_noise_realizations,
                            n_seeds: c.n_seeds_per_noise,
                        });
                    }
                }
            }
        }
        for r in &self.references {
            let (label, params) = match r.kind {
                ReferenceKind::Harmonic => ("harmonic", ModelParams::harmonic(m.n_sites, m.h, m.beta)),
                ReferenceKind::FreeParticle => ("free_particle", ModelParams::new(m.n_sites, 0.0, 0.0, 0.0, 0.0, m.beta)),
            };
            out.push(Point {
                label: label.into(),
                params,
                reference: Some(r.kind),
                n_noise: 1,
                n_seeds: r.n_seeds,
            });
        }
        out
    }

    /// Number of simulation jobs, references included.
    pub fn job_count(&self) -> usize {
        self.points().iter().map(|p| p.n_noise * p.n_seeds).sum()
    }

    /// Hex SHA-256 of the canonical JSON form, ignoring `output_dir`.
    pub fn config_hash(&self) -> String {
        let mut s = self.clone();
        s.output_dir = None;
        let json = serde_json::to_vec(&s).expect("spec serialises");
        hex::encode(Sha256::digest(&json))
    }
}

pub fn point_label(p: &ModelParams) -> String {
    format!("eps={}_h={}_beta={}_n={}", p.epsilon, p.h, p.beta, p.n_sites)
}

/// Named, ready-to-run campaigns.
pub const PRESETS: [&str; 5] = ["fig1a", "fig1b", "fig2a", "fig2b", "table_structural"];

/// Attraction used wherever a heteropolymer run does not state its own.
pub const DEFAULT_HETERO_A: f64 = 2.7;

pub fn preset(name: &str) -> Result<CampaignSpec> {
    let n = 20;
    let base = |model: ModelParams, eps: Vec<f64>, noise: usize, seeds: usize| CampaignSpec {
        name: name.to_string(),
        model,
        dynamics: DynamicsConfig::default(),
        campaign: CampaignSection {
            epsilon_list: eps,
            h_list: None,
            beta_list: None,
            n_sites_list: None,
            n_noise_realizations: noise,
            n_seeds_per_noise: seeds,
            base_seed: 1,
            noise_distribution: NoiseDistribution::Gaussian,
            init_style: InitStyle::RandomCoil,
            min_success_fraction: 0.8,
        },
        observables: ObservableSection::default(),
        fit: FitSection::default(),
        references: vec![],
        checks: vec![],
        assumptions: vec![],
        output_dir: None,
    };
    let hetero = ModelParams::new(n, 1.0, DEFAULT_HETERO_A, 2.0, 0.0, 1.0);
    let label = |eps: f64, h: f64| point_label(&ModelParams { epsilon: eps, h, ..hetero.clone() });
    let mut spec = match name {
        "fig1a" => {
            let m = ModelParams::harmonic(n, 1.0, 1.0);
            let mut s = base(m.clone(), vec![0.0], 1, 50);
            let l = point_label(&m);
            s.checks = vec![
                Check::NuWithin { label: l.clone(), target: 0.5, tol: 0.05 },
                Check::OracleOverlay { label: l, max_rel_dev: 0.10 },
            ];
            s
        }
        "fig1b" => {
            let m = ModelParams { a_attract: 3.8, ..hetero.clone() };
            let mut s = base(m.clone(), vec![0.0], 1, 20);
            s.campaign.h_list = Some(vec![1.0, 10.0]);
            let l1 = point_label(&ModelParams { h: 1.0, ..m.clone() });
            let l10 = point_label(&ModelParams { h: 10.0, ..m });
            s.checks = vec![
                Check::NuWithin { label: l1.clone(), target: 0.66, tol: 0.06 },
                Check::NuIndistinguishable { a: l1, b: l10 },
            ];
            s
        }
        "fig2a" => {
            let mut s = base(hetero.clone(), vec![10.0, 6.0, 0.0], 10, 10);
            s.references = vec![
                Reference { kind: ReferenceKind::Harmonic, n_seeds: 10 },
                Reference { kind: ReferenceKind::FreeParticle, n_seeds: 10 },
            ];
            s.checks = vec![
                Check::NuDecreasingInEpsilon,
                Check::NuWithin { label: label(10.0, 1.0), target: 0.61, tol: 0.08 },
                Check::NoiseIndependence { label: label(10.0, 1.0) },
            ];
            s.assumptions.push(format!("a_attract = {DEFAULT_HETERO_A}"));
            s
        }
        "fig2b" => {
            let mut s = base(hetero.clone(), vec![6.0, 4.5, 3.0, 0.0], 10, 10);
            s.observables.fixed_lag = Some(100_000);
            s.checks = vec![Check::MedianDecreasingInEpsilon];
            s.assumptions.push(format!("a_attract = {DEFAULT_HETERO_A}"));
            s.assumptions.push("fixed lag = 100000 sweeps".into());
            s
        }
        "table_structural" => {
            let mut s = base(hetero.clone(), vec![0.0], 1, 20);
            s.checks = vec![Check::BondSqWithin { label: label(0.0, 1.0), target: 1.72, band: 3.0 * 0.089 }];
            s.assumptions.push(format!("a_attract = {DEFAULT_HETERO_A}"));
            s
        }
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    spec.assumptions.push("trial radius tuned to 40-60% acceptance during thermalisation".into());
    spec.validate()?;
    Ok(spec)
}

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::spec::{CampaignSpec, Check, Point, ReferenceKind};
use super::{read_to_string, write_atomic};
use crate::analysis::{
    bootstrap_nu, fit_power_law_with, k_coeff_trends, nu_noise_independence, nu_vs_epsilon, NoiseIndependenceReport,
    NuTable, PowerLawFit, TrendReport, Z_WITHIN_ERRORS,
};
use crate::dynamics::{initial_conformation, run_with_sink, Checkpoint, DynamicsConfig, RunSummary, Simulation};
use crate::error::{Error, Result};
use crate::model::{generate_noise, NoiseMatrix};
use crate::observables::{
    structural_summary, DiffusionSeries, FixedLagSampler, Histogram, LagAccumulator, LagCurve, LagSchedule,
    OriginMode, StructuralSummary, StructureAccumulator, StructureSample,
};
use crate::oracle::{d4_curve, fit_time_scale, oracle_csv, OracleParams, TimeScaleFit};
use crate::stats;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "HETCHAIN_THREADS";

/// Deterministic 64-bit seed from a base seed and a path of tags.
pub fn derive_seed(base: u64, tags: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    for t in tags {
        h.update([0u8]);
        h.update(t.as_bytes());
    }
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

/// One simulation: a point, a noise realisation and a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    pub id: String,
    /// Index into [`CampaignSpec::points`]; not persisted.
    #[serde(skip)]
    pub point: usize,
    pub noise_index: usize,
    pub seed_index: usize,
    pub noise_seed: u64,
    pub mc_seed: u64,
    pub init_seed: u64,
}

/// What a finished job leaves behind.
#[derive(Debug, Clone, PartialEq)]
pub struct JobOutput {
    pub curve: LagCurve,
    pub structure: StructureSample,
    pub fixed_lag: Vec<f64>,
    pub summary: RunSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct JobRecord {
    job: JobSpec,
    job_hash: String,
    summary: RunSummary,
    structure: StructureSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobFailure {
    pub id: String,
    pub error: String,
}

/// Aggregated result for one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub label: String,
    pub params: crate::model::ModelParams,
    pub reference: Option<ReferenceKind>,
    pub n_jobs: usize,
    pub n_ok: usize,
    pub failures: Vec<JobFailure>,
    pub aggregated: bool,
    pub mean_acceptance: Option<f64>,
    pub mean_trial_radius: Option<f64>,
    pub fit: Option<PowerLawFit>,
    pub fit_error: Option<String>,
    /// Bootstrap spread of `nu` over trajectories inside the fitted window.
    pub nu_bootstrap_err: Option<f64>,
    /// Fits of each noise realisation inside the pooled window.
    pub noise_fits: Vec<Option<PowerLawFit>>,
    pub noise_report: Option<NoiseIndependenceReport>,
    pub structure: Option<StructuralSummary>,
    pub fixed_lag_samples: usize,
    pub fixed_lag_median: Option<f64>,
    pub oracle: Option<TimeScaleFit>,
}

impl PointResult {
    /// Error used when comparing exponents: the bootstrap spread when
    /// available, else the regression error.
    pub fn nu_sigma(&self) -> Option<f64> {
        let f = self.fit.as_ref()?;
        Some(self.nu_bootstrap_err.unwrap_or(f.nu_err))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: Check,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub config_hash: String,
    pub spec: CampaignSpec,
    pub assumptions: Vec<String>,
    pub n_jobs: usize,
    pub points: Vec<PointResult>,
    pub nu_tables: Vec<NuTable>,
    pub trends: Vec<TrendReport>,
    pub verdicts: Vec<Verdict>,
    pub all_passed: bool,
    pub files: Vec<String>,
}

impl Manifest {
    pub fn point(&self, label: &str) -> Option<&PointResult> {
        self.points.iter().find(|p| p.label == label)
    }
}

#[derive(Debug, Clone)]
pub struct CampaignReport {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
    pub jobs_run: usize,
    pub jobs_resumed: usize,
}

fn job_dir(out: &Path, label: &str, job: &JobSpec) -> PathBuf {
    out.join("jobs").join(label).join(format!("n{:03}_s{:03}", job.noise_index, job.seed_index))
}

/// Enumerates every job in a fixed order: points, then noise, then seed.
pub fn plan_jobs(spec: &CampaignSpec) -> Vec<(Point, JobSpec)> {
    let base = spec.campaign.base_seed;
    let mut out = Vec::new();
    for (pi, p) in spec.points().into_iter().enumerate() {
        for ni in 0..p.n_noise {
            // Couplings depend on N and the realisation index only, so every
            // epsilon (and h, beta) sees the same eta.
            let noise_seed = derive_seed(base, &["noise", &p.params.n_sites.to_string(), &ni.to_string()]);
            for si in 0..p.n_seeds {
                let tags = [p.label.as_str(), &ni.to_string(), &si.to_string()];
                let job = JobSpec {
                    id: format!("{}/n{:03}_s{:03}", p.label, ni, si),
                    point: pi,
                    noise_index: ni,
                    seed_index: si,
                    noise_seed,
                    mc_seed: derive_seed(base, &[&["mc"][..], &tags].concat()),
                    init_seed: derive_seed(base, &[&["init"][..], &tags].concat()),
                };
                out.push((p.clone(), job));
            }
        }
    }
    out
}

fn job_config(spec: &CampaignSpec, point: &Point, job: &JobSpec) -> DynamicsConfig {
    let mut cfg = spec.dynamics.clone();
    cfg.rng_seed = job.mc_seed;
    if point.reference == Some(ReferenceKind::FreeParticle) {
        cfg.accept_all = true;
        cfg.tune_trial_radius = false;
        cfg.sweeps_thermalize = Some(0);
    }
    cfg
}

fn schedule(spec: &CampaignSpec) -> Result<LagSchedule> {
    let cfg = &spec.dynamics;
    let max_lag = spec.observables.max_lag.unwrap_or(cfg.measured_sweeps() / 2).max(cfg.record_stride);
    LagSchedule::log_spaced(cfg.record_stride, max_lag, spec.observables.lags_per_decade)
}

fn job_hash(spec: &CampaignSpec, point: &Point, job: &JobSpec) -> String {
    let key = serde_json::json!({
        "params": point.params,
        "dynamics": job_config(spec, point, job),
        "observables": spec.observables,
        "noise_distribution": spec.campaign.noise_distribution,
        "init_style": spec.campaign.init_style,
        "job": job,
    });
    hex::encode(Sha256::digest(key.to_string().as_bytes()))
}

fn samples_csv(v: &[f64]) -> String {
    let mut s = String::from("d4\n");
    for x in v {
        s.push_str(&format!("{x:?}\n"));
    }
    s
}

fn parse_samples(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.trim().parse().map_err(|_| Error::Parse(format!("bad sample `{l}`"))))
        .collect()
}

fn run_job(spec: &CampaignSpec, point: &Point, job: &JobSpec, dir: &Path) -> Result<JobOutput> {
    let params = &point.params;
    let noise = if params.epsilon == 0.0 {
        NoiseMatrix::zeros(params.n_sites)
    } else {
        generate_noise(params.n_sites, job.noise_seed, spec.campaign.noise_distribution)?
    };
    let cfg = job_config(spec, point, job);
    let init = initial_conformation(params, spec.campaign.init_style, job.init_seed)?;
    let mut sim = Simulation::new(init, params, &noise, &cfg)?;
    let obs = &spec.observables;
    let mut lags = LagAccumulator::new(&schedule(spec)?, cfg.record_stride, OriginMode::Multi { every: obs.origin_every })?;
    let mut structure = StructureAccumulator::new(obs.structure_every);
    let mut fixed = match obs.fixed_lag {
        Some(lag) => Some(FixedLagSampler::new(lag, lag)?),
        None => None,
    };
    let summary = match fixed.as_mut() {
        Some(f) => run_with_sink(&mut sim, ((&mut lags, &mut structure), f))?,
        None => run_with_sink(&mut sim, (&mut lags, &mut structure))?,
    };
    let out = JobOutput {
        curve: lags.finish(),
        structure: structure.finish()?,
        fixed_lag: fixed.map(|f| f.samples).unwrap_or_default(),
        summary,
    };
    write_atomic(&dir.join("curve.csv"), out.curve.to_csv().as_bytes())?;
    write_atomic(&dir.join("fixed_lag.csv"), samples_csv(&out.fixed_lag).as_bytes())?;
    let ck = Checkpoint::capture(&sim, &noise);
    write_atomic(&dir.join("checkpoint.txt"), ck.to_text()?.as_bytes())?;
    // Written last: its presence marks the job complete.
    let rec = JobRecord {
        job: job.clone(),
        job_hash: job_hash(spec, point, job),
        summary: out.summary,
        structure: out.structure,
    };
    write_atomic(&dir.join("job.json"), serde_json::to_string_pretty(&rec)?.as_bytes())?;
    Ok(out)
}

fn load_job(spec: &CampaignSpec, point: &Point, job: &JobSpec, dir: &Path) -> Option<JobOutput> {
    let rec: JobRecord = serde_json::from_str(&read_to_string(&dir.join("job.json")).ok()?).ok()?;
    if rec.job_hash != job_hash(spec, point, job) {
        return None;
    }
    let curve = LagCurve::from_csv(&read_to_string(&dir.join("curve.csv")).ok()?).ok()?;
    let fixed_lag = parse_samples(&read_to_string(&dir.join("fixed_lag.csv")).ok()?).ok()?;
    Some(JobOutput { curve, structure: rec.structure, fixed_lag, summary: rec.summary })
}

fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).filter(|&n| n > 0)
}

/// Runs (or resumes) every job of `spec` under `out`, aggregates each point,
/// evaluates the checks and writes `manifest.json`. Completed jobs whose
/// inputs are unchanged are loaded rather than rerun. Returns
/// [`Error::CampaignFailed`] after writing the manifest if any point had too
/// few successful jobs to aggregate.
pub fn run_campaign(spec: &CampaignSpec, out: &Path) -> Result<CampaignReport> {
    spec.validate()?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let plan = plan_jobs(spec);
    let exec = |(point, job): &(Point, JobSpec)| -> (bool, Result<JobOutput>) {
        let dir = job_dir(out, &point.label, job);
        match load_job(spec, point, job, &dir) {
            Some(o) => (true, Ok(o)),
            None => (false, run_job(spec, point, job, &dir)),
        }
    };
    let results: Vec<(bool, Result<JobOutput>)> = match thread_count() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?
            .install(|| plan.par_iter().map(exec).collect()),
        None => plan.par_iter().map(exec).collect(),
    };
    let jobs_resumed = results.iter().filter(|(r, _)| *r).count();
    let jobs_run = results.len() - jobs_resumed;

    let points = spec.points();
    let mut files = Vec::new();
    let mut point_results = Vec::new();
    for (pi, point) in points.iter().enumerate() {
        let mine: Vec<(&JobSpec, &Result<JobOutput>)> = plan
            .iter()
            .zip(&results)
            .filter(|((_, j), _)| j.point == pi)
            .map(|((_, j), (_, r))| (j, r))
            .collect();
        let pr = aggregate_point(spec, point, &mine, out, &mut files)?;
        point_results.push(pr);
    }

    let nu_tables = epsilon_tables(&point_results);
    let trends = coefficient_trends(&point_results);
    let verdicts: Vec<Verdict> = spec.checks.iter().map(|c| evaluate(c, &point_results)).collect();
    let all_passed = verdicts.iter().all(|v| v.passed);
    let manifest = Manifest {
        name: spec.name.clone(),
        config_hash: spec.config_hash(),
        spec: CampaignSpec { output_dir: None, ..spec.clone() },
        assumptions: spec.assumptions.clone(),
        n_jobs: plan.len(),
        points: point_results,
        nu_tables,
        trends,
        verdicts,
        all_passed,
        files,
    };
    let manifest_path = out.join("manifest.json");
    write_atomic(&manifest_path, serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    let failed: Vec<&str> = manifest.points.iter().filter(|p| !p.aggregated).map(|p| p.label.as_str()).collect();
    if !failed.is_empty() {
        return Err(Error::CampaignFailed(format!(
            "too few successful jobs for {}; see {}",
            failed.join(", "),
            manifest_path.display()
        )));
    }
    Ok(CampaignReport { manifest, manifest_path, jobs_run, jobs_resumed })
}

fn aggregate_point(
    spec: &CampaignSpec,
    point: &Point,
    jobs: &[(&JobSpec, &Result<JobOutput>)],
    out: &Path,
    files: &mut Vec<String>,
) -> Result<PointResult> {
    let failures: Vec<JobFailure> = jobs
        .iter()
        .filter_map(|(j, r)| r.as_ref().err().map(|e| JobFailure { id: j.id.clone(), error: e.to_string() }))
        .collect();
    let ok: Vec<(&JobSpec, &JobOutput)> = jobs.iter().filter_map(|(j, r)| r.as_ref().ok().map(|o| (*j, o))).collect();
    let needed = (spec.campaign.min_success_fraction * jobs.len() as f64).ceil() as usize;
    let mut pr = PointResult {
        label: point.label.clone(),
        params: point.params.clone(),
        reference: point.reference,
        n_jobs: jobs.len(),
        n_ok: ok.len(),
        failures,
        aggregated: false,
        mean_acceptance: None,
        mean_trial_radius: None,
        fit: None,
        fit_error: None,
        nu_bootstrap_err: None,
        noise_fits: vec![],
        noise_report: None,
        structure: None,
        fixed_lag_samples: 0,
        fixed_lag_median: None,
        oracle: None,
    };
    if ok.is_empty() || ok.len() < needed {
        return Ok(pr);
    }
    pr.aggregated = true;
    let rel = |name: &str| format!("points/{}/{}", point.label, name);
    let put = |name: &str, body: String, files: &mut Vec<String>| -> Result<()> {
        let r = rel(name);
        write_atomic(&out.join(&r), body.as_bytes())?;
        files.push(r);
        Ok(())
    };

    let acc: Vec<f64> = ok.iter().map(|(_, o)| o.summary.acceptance_rate).collect();
    let rad: Vec<f64> = ok.iter().map(|(_, o)| o.summary.trial_radius).collect();
    pr.mean_acceptance = Some(stats::mean(&acc));
    pr.mean_trial_radius = Some(stats::mean(&rad));

    let curves: Vec<LagCurve> = ok.iter().map(|(_, o)| o.curve.clone()).collect();
    let series = DiffusionSeries::from_curves(&curves)?;
    put("series.csv", series.to_csv(), files)?;

    let structs: Vec<StructureSample> = ok.iter().map(|(_, o)| o.structure).collect();
    pr.structure = Some(structural_summary(&structs)?);

    let opts = spec.fit.options();
    match fit_power_law_with(&series, None, &opts) {
        Ok(fit) => {
            pr.fit = Some(fit);
            if curves.len() >= 2 && spec.fit.bootstrap_resamples > 0 {
                let seed = derive_seed(spec.campaign.base_seed, &["bootstrap", &point.label]);
                pr.nu_bootstrap_err = bootstrap_nu(&curves, fit.window, spec.fit.bootstrap_resamples, seed).ok();
            }
            if point.n_noise > 1 {
                for ni in 0..point.n_noise {
                    let cs: Vec<LagCurve> =
                        ok.iter().filter(|(j, _)| j.noise_index == ni).map(|(_, o)| o.curve.clone()).collect();
                    let f = DiffusionSeries::from_curves(&cs)
                        .and_then(|s| fit_power_law_with(&s, Some(fit.window), &opts))
                        .ok();
                    pr.noise_fits.push(f);
                }
                let good: Vec<PowerLawFit> = pr.noise_fits.iter().flatten().copied().collect();
                pr.noise_report = nu_noise_independence(&good).ok();
            }
            if is_harmonic(&point.params) {
                pr.oracle = oracle_overlay(spec, point, &series, &fit, rad.as_slice(), &mut |n, b, f| put(n, b, f), files)?;
            }
        }
        Err(e) => pr.fit_error = Some(e.to_string()),
    }

    let samples: Vec<f64> = ok.iter().flat_map(|(_, o)| o.fixed_lag.iter().copied()).collect();
    if spec.observables.fixed_lag.is_some() {
        pr.fixed_lag_samples = samples.len();
        put("fixed_lag_samples.csv", samples_csv(&samples), files)?;
        if !samples.is_empty() {
            pr.fixed_lag_median = Some(stats::median(&samples));
            if let Ok(h) = Histogram::from_samples(&samples, spec.observables.histogram_bins) {
                put("histogram.csv", h.to_csv(), files)?;
            }
        }
    }
    put("point.json", serde_json::to_string_pretty(&pr)?, files)?;
    Ok(pr)
}

fn is_harmonic(p: &crate::model::ModelParams) -> bool {
    p.a_attract == 0.0 && p.r_repel == 0.0 && p.epsilon == 0.0 && p.h > 0.0
}

type Put<'a> = dyn FnMut(&str, String, &mut Vec<String>) -> Result<()> + 'a;

/// Matches the exact harmonic curve to the measured one inside the fitted
/// window and writes both on a common time axis.
fn oracle_overlay(
    spec: &CampaignSpec,
    point: &Point,
    series: &DiffusionSeries,
    fit: &PowerLawFit,
    radii: &[f64],
    put: &mut Put<'_>,
    files: &mut Vec<String>,
) -> Result<Option<TimeScaleFit>> {
    let p = &point.params;
    let cfg = DynamicsConfig { trial_radius: stats::mean(radii), ..spec.dynamics.clone() };
    let op = OracleParams::harmonic(p.n_sites, p.h, 1.0 / p.beta, cfg.effective_friction(p.beta))?;
    let (lo, hi) = fit.window;
    let idx: Vec<usize> = (0..series.len()).filter(|&k| series.times[k] >= lo && series.times[k] <= hi).collect();
    let t: Vec<f64> = idx.iter().map(|&k| series.times[k]).collect();
    let v: Vec<f64> = idx.iter().map(|&k| series.d4_mean[k]).collect();
    let ts = match fit_time_scale(&t, &v, &op) {
        Ok(ts) => ts,
        Err(_) => return Ok(None),
    };
    let scaled: Vec<f64> = series.times.iter().map(|t| t * ts.scale).collect();
    put("oracle.csv", oracle_csv(&series.times, &d4_curve(&scaled, &op)), files)?;
    Ok(Some(ts))
}

/// One exponent table per (h, beta, N) group of main points with a fit.
fn epsilon_tables(points: &[PointResult]) -> Vec<NuTable> {
    let mut groups: Vec<((f64, f64, usize), Vec<(f64, PowerLawFit)>)> = Vec::new();
    for p in points.iter().filter(|p| p.reference.is_none()) {
        let (Some(fit), Some(sig)) = (p.fit, p.nu_sigma()) else { continue };
        let key = (p.params.h, p.params.beta, p.params.n_sites);
        let entry = (p.params.epsilon, PowerLawFit { nu_err: sig, ..fit });
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(entry),
            None => groups.push((key, vec![entry])),
        }
    }
    groups.into_iter().filter(|(_, v)| v.len() >= 2).map(|(_, v)| nu_vs_epsilon(&v)).collect()
}

/// `ln k` trends along every axis that has at least three fitted values with
/// the other parameters held fixed.
fn coefficient_trends(points: &[PointResult]) -> Vec<TrendReport> {
    let main: Vec<&PointResult> = points.iter().filter(|p| p.reference.is_none() && p.fit.is_some()).collect();
    let axes: [(&str, fn(&PointResult) -> f64); 4] = [
        ("epsilon", |p| p.params.epsilon),
        ("h", |p| p.params.h),
        ("beta", |p| p.params.beta),
        ("n_sites", |p| p.params.n_sites as f64),
    ];
    let mut out = Vec::new();
    for (ai, (name, get)) in axes.iter().enumerate() {
        let mut done: Vec<Vec<f64>> = Vec::new();
        for p in &main {
            let others: Vec<f64> =
                axes.iter().enumerate().filter(|(k, _)| *k != ai).map(|(_, (_, g))| g(p)).collect();
            if done.contains(&others) {
                continue;
            }
            let same: Vec<&&PointResult> = main
                .iter()
                .filter(|q| axes.iter().enumerate().filter(|(k, _)| *k != ai).all(|(_, (_, g))| g(q) == g(p)))
                .collect();
            done.push(others);
            if same.len() < 3 {
                continue;
            }
            let xs: Vec<f64> = same.iter().map(|q| get(q)).collect();
            let fits: Vec<PowerLawFit> = same.iter().map(|q| q.fit.expect("filtered")).collect();
            if let Ok(t) = k_coeff_trends(name, &xs, &fits) {
                out.push(t);
            }
        }
    }
    out
}

fn evaluate(check: &Check, points: &[PointResult]) -> Verdict {
    let find = |l: &str| points.iter().find(|p| p.label == l);
    let (passed, detail) = match check {
        Check::NuWithin { label, target, tol } => match find(label).and_then(|p| p.fit) {
            Some(f) => ((f.nu_hat - target).abs() <= *tol, format!("nu = {:.4}, target {target} ± {tol}", f.nu_hat)),
            None => (false, format!("{label}: no fit")),
        },
        Check::NuIndistinguishable { a, b } => {
            match (find(a), find(b)) {
                (Some(pa), Some(pb)) => match (pa.fit, pa.nu_sigma(), pb.fit, pb.nu_sigma()) {
                    (Some(fa), Some(sa), Some(fb), Some(sb)) => {
                        let z = (fa.nu_hat - fb.nu_hat).abs() / sa.hypot(sb);
                        (
                            z <= Z_WITHIN_ERRORS,
                            format!("{:.4} ± {sa:.4} vs {:.4} ± {sb:.4}: {z:.2} sigma", fa.nu_hat, fb.nu_hat),
                        )
                    }
                    _ => (false, "missing fit".into()),
                },
                _ => (false, "unknown point".into()),
            }
        }
        Check::NuDecreasingInEpsilon => {
            let tables = epsilon_tables(points);
            if tables.is_empty() {
                (false, "fewer than two fitted epsilon values".into())
            } else {
                let ok = tables.iter().all(|t| t.weakly_decreasing);
                let rows: Vec<String> = tables
                    .iter()
                    .flat_map(|t| t.rows.iter().map(|r| format!("{}:{:.4}±{:.4}", r.epsilon, r.nu_hat, r.nu_err)))
                    .collect();
                (ok, rows.join(" "))
            }
        }
        Check::MedianDecreasingInEpsilon => {
            let mut m: Vec<(f64, f64)> = points
                .iter()
                .filter(|p| p.reference.is_none())
                .filter_map(|p| p.fixed_lag_median.map(|v| (p.params.epsilon, v)))
                .collect();
            m.sort_by(|a, b| a.0.total_cmp(&b.0));
            let ok = m.len() >= 2 && m.windows(2).all(|w| w[1].1 < w[0].1);
            (ok, m.iter().map(|(e, v)| format!("{e}:{v:.4}")).collect::<Vec<_>>().join(" "))
        }
        Check::NoiseIndependence { label } => match find(label).and_then(|p| p.noise_report) {
            Some(r) => (r.nu_independent, r.to_string()),
            None => (false, format!("{label}: fewer than three fitted realisations")),
        },
        Check::BondSqWithin { label, target, band } => match find(label).and_then(|p| p.structure) {
            Some(s) => (
                (s.bond_sq.mean - target).abs() <= *band,
                format!("<d^2> = {}, target {target} ± {band}", s.bond_sq),
            ),
            None => (false, format!("{label}: not aggregated")),
        },
        Check::OracleOverlay { label, max_rel_dev } => match find(label).and_then(|p| p.oracle) {
            Some(o) => (
                o.max_rel_dev <= *max_rel_dev,
                format!("max deviation {:.4} (limit {max_rel_dev}) over {} points", o.max_rel_dev, o.n_points),
            ),
            None => (false, format!("{label}: no oracle overlay")),
        },
    };
    Verdict { check: check.clone(), passed, detail }
}

use std::fs;
use std::path::Path;

use hetchain::campaign::{preset, run_campaign, CampaignSpec, Check, Reference, ReferenceKind};
use hetchain::Error;

fn small_spec() -> CampaignSpec {
    let mut s = preset("fig2b").unwrap();
    s.name = "small".into();
    s.model.n_sites = 8;
    s.campaign.epsilon_list = vec![2.0, 0.0];
    s.campaign.n_noise_realizations = 2;
    s.campaign.n_seeds_per_noise = 2;
    s.dynamics.sweeps_measure = 2_000;
    s.dynamics.sweeps_thermalize = Some(500);
    s.observables.fixed_lag = Some(500);
    s.observables.max_lag = Some(500);
    s.fit.bootstrap_resamples = 20;
    s.fit.slope_tolerance = 0.2;
    s.references = vec![Reference { kind: ReferenceKind::Harmonic, n_seeds: 4 }];
    s.checks = vec![Check::MedianDecreasingInEpsilon];
    s
}

fn files_under(root: &Path) -> Vec<String> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap().to_string_lossy().into_owned());
            }
        }
    }
    out.sort();
    out
}

#[test]
fn job_count_matches_axes() {
    let spec = small_spec();
    assert_eq!(spec.job_count(), 2 * 2 * 2 + 4);
    let dir = tempfile::tempdir().unwrap();
    let rep = run_campaign(&spec, dir.path()).unwrap();
    assert_eq!(rep.manifest.n_jobs, 12);
    assert_eq!(rep.jobs_run, 12);
    let job_files = files_under(dir.path()).into_iter().filter(|f| f.ends_with("job.json")).count();
    assert_eq!(job_files, 12);
    assert_eq!(rep.manifest.points.len(), 3);
    assert!(rep.manifest.points.iter().all(|p| p.aggregated && p.n_ok == p.n_jobs));
    // Harmonic reference gets the exact-curve overlay.
    let h = rep.manifest.point("harmonic").unwrap();
    assert!(h.oracle.is_some());
    assert_eq!(rep.manifest.verdicts.len(), 1);
}

#[test]
fn reruns_are_byte_identical() {
    let spec = small_spec();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_campaign(&spec, a.path()).unwrap();
    run_campaign(&spec, b.path()).unwrap();
    let fa = files_under(a.path());
    assert_eq!(fa, files_under(b.path()));
    for f in &fa {
        assert!(fs::read(a.path().join(f)).unwrap() == fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn resume_skips_completed_jobs() {
    let spec = small_spec();
    let dir = tempfile::tempdir().unwrap();
    let first = run_campaign(&spec, dir.path()).unwrap();
    let manifest = fs::read(&first.manifest_path).unwrap();

    let again = run_campaign(&spec, dir.path()).unwrap();
    assert_eq!((again.jobs_run, again.jobs_resumed), (0, 12));
    assert_eq!(fs::read(&again.manifest_path).unwrap(), manifest);

    // An interrupted job has no completion record and is redone.
    let victim = dir.path().join("jobs").join(&first.manifest.points[0].label).join("n001_s000");
    fs::remove_file(victim.join("job.json")).unwrap();
    fs::write(victim.join("curve.csv"), "garbage").unwrap();
    let third = run_campaign(&spec, dir.path()).unwrap();
    assert_eq!((third.jobs_run, third.jobs_resumed), (1, 11));
    assert_eq!(fs::read(&third.manifest_path).unwrap(), manifest);
}

#[test]
fn changed_inputs_invalidate_jobs() {
    let spec = small_spec();
    let dir = tempfile::tempdir().unwrap();
    run_campaign(&spec, dir.path()).unwrap();
    let mut longer = spec.clone();
    longer.dynamics.sweeps_measure = 2_500;
    let rep = run_campaign(&longer, dir.path()).unwrap();
    assert_eq!(rep.jobs_resumed, 0);
}

#[test]
fn extra_seeds_leave_existing_jobs_untouched() {
    let spec = small_spec();
    let mut wider = spec.clone();
    wider.campaign.n_seeds_per_noise = 3;
    wider.campaign.epsilon_list = vec![4.0, 2.0, 0.0];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_campaign(&spec, a.path()).unwrap();
    let rep = run_campaign(&wider, b.path()).unwrap();
    assert_eq!(rep.manifest.n_jobs, 3 * 2 * 3 + 4);
    let common: Vec<String> = files_under(a.path()).into_iter().filter(|f| f.starts_with("jobs")).collect();
    assert_eq!(common.len(), 12 * 4);
    for f in &common {
        assert!(fs::read(a.path().join(f)).unwrap() == fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    // Resuming the wider campaign on the smaller one's directory reuses them.
    let rep = run_campaign(&wider, a.path()).unwrap();
    assert_eq!(rep.jobs_resumed, 12);
}

#[test]
fn too_many_failures_abort_after_manifest() {
    let mut spec = small_spec();
    // An impossible acceptance band makes every job fail.
    spec.dynamics.acceptance_bounds = Some((0.999, 1.0));
    let dir = tempfile::tempdir().unwrap();
    let err = run_campaign(&spec, dir.path()).unwrap_err();
    assert!(matches!(err, Error::CampaignFailed(_)), "{err}");
    let text = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(m["points"][0]["aggregated"], false);
    assert_eq!(m["points"][0]["failures"].as_array().unwrap().len(), 4);
    assert_eq!(m["all_passed"], false);
}

#[test]
fn config_files_round_trip() {
    let spec = small_spec();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.toml");
    fs::write(&p, spec.to_toml().unwrap()).unwrap();
    assert_eq!(CampaignSpec::load(&p).unwrap(), spec);
}

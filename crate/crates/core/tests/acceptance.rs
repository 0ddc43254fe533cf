//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Campaign outputs are left under
//! `$CARGO_TARGET_TMPDIR/acceptance` for inspection.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{Rotation3, Unit};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hetchain::analysis::{nu_vs_epsilon, PowerLawFit, Z_WITHIN_ERRORS};
use hetchain::campaign::{point_label, preset, run_campaign, CampaignSpec, Manifest, PointResult};
use hetchain::dynamics::{initial_conformation, Checkpoint, InitStyle};
use hetchain::model::{generate_noise, Conformation, Hamiltonian, ModelParams, NoiseDistribution, NoiseMatrix};
use hetchain::observables::{d2, d4, DiffusionSeries, LagAccumulator, LagSchedule, OriginMode};
use hetchain::oracle::{d4_analytic, laplacian_eigenvalue, langevin_toy_integrator, normal_mode_transform, OracleParams};
use hetchain::spectral::{fit_alpha, hessian_spectrum, local_minimize_with, predict_nu, summarize_alpha, MinimizeOptions};
use hetchain::{Result, Vec3};

// Pinned tolerances.
const A1_NU: (f64, f64) = (0.50, 0.05);
const A1_OVERLAY: f64 = 0.10;
const A1_MIN_SEEDS: usize = 50;
const A2_NU: (f64, f64) = (0.66, 0.06);
const A3_NU10: (f64, f64) = (0.61, 0.08);
const A4_BOND_SQ: (f64, f64) = (1.72, 3.0 * 0.089);
const A4_ENERGY: (f64, f64) = (-299.34, 0.22);
const A4_END_TO_END: (f64, f64) = (7.23, 1.34);
const A5_EQUIPARTITION: f64 = 0.05;
const A6_ALPHA: (f64, f64) = (2.0, 0.1);
const A6_NU: (f64, f64) = (0.50, 0.03);
const A7_MIN_SAMPLES: usize = 100;
const P1_DELTA_RTOL: f64 = 1e-9;
const P1_HESSIAN_RTOL: f64 = 1e-5;

struct Outcome {
    id: &'static str,
    passed: bool,
    detail: String,
}

fn outcome(id: &'static str, r: Result<(bool, String)>) -> Outcome {
    match r {
        Ok((passed, detail)) => Outcome { id, passed, detail },
        Err(e) => Outcome { id, passed: false, detail: format!("error: {e}") },
    }
}

fn within(x: f64, (target, tol): (f64, f64)) -> bool {
    (x - target).abs() <= tol
}

fn run_fresh(spec: &CampaignSpec, root: &Path) -> Result<Manifest> {
    let dir = root.join(&spec.name);
    let _ = fs::remove_dir_all(&dir);
    let t = Instant::now();
    let rep = run_campaign(spec, &dir)?;
    eprintln!("  campaign {}: {} jobs in {:.0}s", spec.name, rep.manifest.n_jobs, t.elapsed().as_secs_f64());
    Ok(rep.manifest)
}

fn fitted<'a>(m: &'a Manifest, label: &str) -> Result<(&'a PointResult, PowerLawFit, f64)> {
    let p = m.point(label).ok_or_else(|| hetchain::Error::InvalidParams(format!("no point {label}")))?;
    let fit = p.fit.ok_or_else(|| {
        hetchain::Error::InvalidParams(format!("{label}: no fit ({})", p.fit_error.clone().unwrap_or_default()))
    })?;
    Ok((p, fit, p.nu_sigma().expect("fit present")))
}

fn a1(root: &Path) -> Result<(bool, String)> {
    let spec = preset("fig1a")?;
    let m = run_fresh(&spec, root)?;
    let label = point_label(&spec.model);
    let (p, fit, sig) = fitted(&m, &label)?;
    let overlay = p.oracle.map(|o| o.max_rel_dev).unwrap_or(f64::INFINITY);
    let ok = p.n_ok >= A1_MIN_SEEDS && within(fit.nu_hat, A1_NU) && overlay <= A1_OVERLAY;
    Ok((
        ok,
        format!(
            "nu = {:.4} ± {sig:.4} (target {} ± {}), window [{}, {}], {} seeds; oracle overlay max dev {:.3} (limit {A1_OVERLAY})",
            fit.nu_hat, A1_NU.0, A1_NU.1, fit.window.0, fit.window.1, p.n_ok, overlay
        ),
    ))
}

fn a2(root: &Path) -> Result<(bool, String, Manifest)> {
    let spec = preset("fig1b")?;
    let m = run_fresh(&spec, root)?;
    let l1 = point_label(&ModelParams { h: 1.0, ..spec.model.clone() });
    let l10 = point_label(&ModelParams { h: 10.0, ..spec.model.clone() });
    let (_, f1, s1) = fitted(&m, &l1)?;
    let (_, f10, s10) = fitted(&m, &l10)?;
    let z = (f1.nu_hat - f10.nu_hat).abs() / s1.hypot(s10);
    let ok = within(f1.nu_hat, A2_NU) && z <= Z_WITHIN_ERRORS;
    let detail = format!(
        "nu(h=1) = {:.4} ± {s1:.4} (target {} ± {}); nu(h=10) = {:.4} ± {s10:.4}; difference {z:.1} sigma (limit {Z_WITHIN_ERRORS})",
        f1.nu_hat, A2_NU.0, A2_NU.1, f10.nu_hat
    );
    Ok((ok, detail, m))
}

fn hetero_spec() -> Result<CampaignSpec> {
    let mut spec = preset("fig2a")?;
    spec.name = "hetero".into();
    spec.campaign.epsilon_list = vec![0.0, 3.0, 4.5, 6.0, 10.0];
    spec.references.clear();
    spec.checks.clear();
    spec.observables.fixed_lag = preset("fig2b")?.observables.fixed_lag;
    Ok(spec)
}

fn eps_label(spec: &CampaignSpec, eps: f64) -> String {
    point_label(&spec.model.clone().with_epsilon(eps))
}

fn a3(spec: &CampaignSpec, m: &Manifest) -> Result<(bool, String)> {
    let mut rows = vec![];
    for eps in [0.0, 6.0, 10.0] {
        let (p, fit, sig) = fitted(m, &eps_label(spec, eps))?;
        if p.noise_fits.len() < 10 {
            return Ok((false, format!("eps={eps}: fewer than 10 noise realisations")));
        }
        rows.push((eps, PowerLawFit { nu_err: sig, ..fit }));
    }
    let table = nu_vs_epsilon(&rows);
    let nu10 = rows[2].1.nu_hat;
    let ok = within(nu10, A3_NU10) && table.weakly_decreasing;
    let cells: Vec<String> = table.rows.iter().map(|r| format!("{}: {:.4} ± {:.4}", r.epsilon, r.nu_hat, r.nu_err)).collect();
    let noise = fitted(m, &eps_label(spec, 10.0))?.0.noise_report.map(|r| r.to_string()).unwrap_or_default();
    Ok((
        ok,
        format!(
            "nu(eps) {}; nu(10) target {} ± {}; weakly decreasing: {}; eps=10 noise: {noise}",
            cells.join(", "),
            A3_NU10.0,
            A3_NU10.1,
            table.weakly_decreasing
        ),
    ))
}

fn a4(spec: &CampaignSpec, m: &Manifest) -> Result<(bool, String)> {
    let label = eps_label(spec, 0.0);
    let s = m
        .point(&label)
        .and_then(|p| p.structure)
        .ok_or_else(|| hetchain::Error::InvalidParams(format!("{label}: no structure")))?;
    let ok = within(s.bond_sq.mean, A4_BOND_SQ);
    Ok((
        ok,
        format!(
            "<d^2_bond> = {} (target {} ± {:.3}, blocking); E_tot = {} vs {} ± {} (dev {:+.2}, logged); <d^2_N1> = {} vs {} ± {} (dev {:+.2}, logged)",
            s.bond_sq,
            A4_BOND_SQ.0,
            A4_BOND_SQ.1,
            s.energy,
            A4_ENERGY.0,
            A4_ENERGY.1,
            s.energy.mean - A4_ENERGY.0,
            s.end_to_end_sq,
            A4_END_TO_END.0,
            A4_END_TO_END.1,
            s.end_to_end_sq.mean - A4_END_TO_END.0
        ),
    ))
}

fn a7(spec: &CampaignSpec, m: &Manifest) -> Result<(bool, String)> {
    let mut meds = vec![];
    for eps in [0.0, 3.0, 4.5, 6.0] {
        let p = m.point(&eps_label(spec, eps)).expect("point exists");
        meds.push((eps, p.fixed_lag_median.unwrap_or(f64::NAN), p.fixed_lag_samples));
    }
    let enough = meds.iter().all(|(_, _, n)| *n >= A7_MIN_SAMPLES);
    let decreasing = meds.windows(2).all(|w| w[1].1 < w[0].1);
    let lag = spec.observables.fixed_lag.unwrap_or(0);
    let cells: Vec<String> = meds.iter().map(|(e, v, n)| format!("{e}: {v:.4} (n={n})")).collect();
    Ok((enough && decreasing, format!("median D4 at lag {lag}: {}; strictly decreasing: {decreasing}", cells.join(", "))))
}

fn a5() -> Result<(bool, String)> {
    let (n, dt, steps, every) = (8, 0.002, 100_000u64, 5u64);
    let op = OracleParams::harmonic(n, 1.0, 1.0, 1.0)?;
    let sched = LagSchedule::log_spaced(every, steps / 2, 30)?;
    let mut curves = vec![];
    let mut mode_sq = vec![0.0; n];
    let mut frames = 0.0;
    for seed in 0..64 {
        let run = langevin_toy_integrator(&op, dt, steps, every, seed)?;
        let mut acc = LagAccumulator::new(&sched, every, OriginMode::Multi { every: 10 })?;
        for (k, (t, c)) in run.trajectory.snapshots.iter().enumerate() {
            acc.push(*t, c)?;
            if k % 10 == 0 {
                let x = normal_mode_transform(c);
                for p in 1..n {
                    mode_sq[p] += x[p].norm_squared() / 3.0;
                }
                frames += 1.0;
            }
        }
        curves.push(acc.finish());
    }
    let series = DiffusionSeries::from_curves(&curves)?.rescaled_time(dt);
    // At N = 8 the local slope never settles, so the automatic window search
    // finds nothing. The Rouse band between the fastest and slowest mode times
    // stands in for it.
    let (lo, hi) = (op.tau0(), op.tau_r());
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for k in 0..series.len() {
        let t = series.times[k];
        if t < lo || t > hi {
            continue;
        }
        let z = (series.d4_mean[k] - d4_analytic(t, &op)).abs() / series.d4_err[k];
        worst = worst.max(z);
        checked += 1;
    }
    let mut worst_mode: f64 = 0.0;
    for p in 1..n {
        let expect = op.temperature / (2.0 * op.h * laplacian_eigenvalue(p, n)) / (2 * n) as f64;
        worst_mode = worst_mode.max((mode_sq[p] / frames / expect - 1.0).abs());
    }
    let ok = worst <= Z_WITHIN_ERRORS && worst_mode <= A5_EQUIPARTITION;
    Ok((
        ok,
        format!(
            "{checked} lags in window [{lo:.3}, {hi:.3}]: worst |MC - oracle| = {worst:.2} sigma (limit {Z_WITHIN_ERRORS}); equipartition worst {:.2}% (limit {}%)",
            100.0 * worst_mode,
            100.0 * A5_EQUIPARTITION
        ),
    ))
}

fn a6(root: &Path, a2_manifest: &Manifest) -> Result<(bool, String)> {
    let n = 20;
    let hp = ModelParams::harmonic(n, 1.0, 1.0);
    let c = initial_conformation(&hp, InitStyle::RandomCoil, 1)?;
    let hs = fit_alpha(&hessian_spectrum(&c, &hp, &NoiseMatrix::zeros(n))?, n, None)?;
    let alpha_h = hs.alpha_hat.unwrap_or(f64::NAN);
    let nu_h = predict_nu(alpha_h)?;
    let harmonic_ok = within(alpha_h, A6_ALPHA) && within(nu_h, A6_NU);

    // Minima quenched from the final states of the h = 1 globule runs.
    let spec = preset("fig1b")?;
    let label = point_label(&ModelParams { h: 1.0, ..spec.model.clone() });
    let (_, nu_fit, nu_sig) = fitted(a2_manifest, &label)?;
    let mut fits = vec![];
    let mut rejected = 0;
    let mut dirs: Vec<PathBuf> = fs::read_dir(root.join(&spec.name).join("jobs").join(&label))
        .map_err(|e| hetchain::Error::InvalidParams(e.to_string()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    dirs.sort();
    for d in dirs {
        let ck = Checkpoint::read(&d.join("checkpoint.txt"))?;
        let noise = ck.noise()?;
        let spectrum = local_minimize_with(&ck.conformation, &ck.params, &noise, &MinimizeOptions::default())
            .and_then(|m| hessian_spectrum(&m.conformation, &ck.params, &noise))
            .and_then(|s| fit_alpha(&s, n, None));
        match spectrum {
            Ok(s) => fits.push(s),
            Err(_) => rejected += 1,
        }
    }
    let alpha = summarize_alpha(&fits)?;
    let nu_pred = predict_nu(alpha.mean)?;
    let nu_pred_err = alpha.err / (alpha.mean * alpha.mean);
    let z = (nu_pred - nu_fit.nu_hat).abs() / nu_pred_err.hypot(nu_sig);
    let lj_ok = z <= Z_WITHIN_ERRORS;
    Ok((
        harmonic_ok && lj_ok,
        format!(
            "harmonic alpha = {alpha_h:.4} (target {} ± {}), predicted nu = {nu_h:.4} (target {} ± {}); globule alpha = {alpha} over {} minima ({rejected} rejected), predicted nu = {nu_pred:.4} ± {nu_pred_err:.4} vs fitted {:.4} ± {nu_sig:.4}: {z:.1} sigma (limit {Z_WITHIN_ERRORS})",
            A6_ALPHA.0, A6_ALPHA.1, A6_NU.0, A6_NU.1, fits.len(), nu_fit.nu_hat
        ),
    ))
}

fn p1(root: &Path) -> Result<(bool, String)> {
    let mut fails = vec![];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);

    // Rigid-motion invariance and the difference-of-squares identity.
    let p = ModelParams::new(12, 1.0, 2.7, 2.0, 4.0, 1.0);
    for k in 0..20 {
        let a = initial_conformation(&p, InitStyle::RandomCoil, 2 * k)?;
        let b = initial_conformation(&p, InitStyle::RandomCoil, 2 * k + 1)?;
        let axis = Unit::new_normalize(Vec3::new(rng.random(), rng.random(), rng.random::<f64>() + 0.1));
        let rot = Rotation3::from_axis_angle(&axis, rng.random_range(0.0..6.0));
        let shift = Vec3::new(rng.random_range(-9.0..9.0), 1.0, -3.0);
        for (x, y) in [(d2(&a, &b)?, d2(&a.transformed(&rot, &shift), &b)?), (d4(&a, &b)?, d4(&a, &b.transformed(&rot, &shift))?)] {
            if (x - y).abs() > 1e-9 * x.abs().max(1.0) {
                fails.push(format!("rigid motion {x} vs {y}"));
            }
        }
        for i in 0..p.n_sites {
            for j in i + 1..p.n_sites {
                let (da, db) = (a.distance_sq(i, j).sqrt(), b.distance_sq(i, j).sqrt());
                let lhs = a.distance_sq(i, j) - b.distance_sq(i, j);
                let rhs = (da - db) * (da + db);
                if (lhs - rhs).abs() > 1e-12 * (a.distance_sq(i, j) + b.distance_sq(i, j)) {
                    fails.push(format!("identity ({i},{j})"));
                }
            }
        }
    }

    // Incremental energy against full recomputation.
    let noise = generate_noise(p.n_sites, 7, NoiseDistribution::Gaussian)?;
    let ham = Hamiltonian::new(&p, &noise)?;
    let mut worst_delta: f64 = 0.0;
    for k in 0..200 {
        let c = initial_conformation(&p, InitStyle::RandomCoil, 100 + k)?;
        let site = rng.random_range(0..p.n_sites);
        let step = Vec3::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3));
        let mut moved = c.positions().to_vec();
        moved[site] += step;
        let (Ok(e0), Ok(e1)) = (ham.total(&c), ham.total(&Conformation::new(moved)?)) else { continue };
        let de = ham.delta(c.positions(), site, &step)?;
        let rel = ((e1 - e0) - de).abs() / e0.abs().max(e1.abs()).max(1.0);
        worst_delta = worst_delta.max(rel);
    }
    if worst_delta > P1_DELTA_RTOL {
        fails.push(format!("energy delta rel err {worst_delta:e}"));
    }

    // Detailed balance on the lattice system.
    let (stat, dof, crit) = common::lattice_chi2(11);
    if stat >= crit {
        fails.push(format!("lattice chi2 {stat:.1} >= {crit:.1}"));
    }

    // Hessian against central differences of the analytic gradient.
    let c = initial_conformation(&p, InitStyle::RandomCoil, 5)?;
    let hess = ham.hessian(&c)?;
    let scale = hess.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let h = 1e-6;
    let dim = 3 * p.n_sites;
    let mut worst_hess: f64 = 0.0;
    for col in 0..dim {
        let bump = |s: f64| -> Result<Vec<Vec3>> {
            let mut pos = c.positions().to_vec();
            pos[col / 3][col % 3] += s * h;
            ham.gradient(&Conformation::new(pos)?)
        };
        let (gp, gm) = (bump(1.0)?, bump(-1.0)?);
        for row in 0..dim {
            let fd = (gp[row / 3][row % 3] - gm[row / 3][row % 3]) / (2.0 * h);
            let an = hess[(row, col)];
            // Entries far below the matrix scale are compared absolutely.
            worst_hess = worst_hess.max((fd - an).abs() / an.abs().max(1e-3 * scale));
        }
    }
    if worst_hess > P1_HESSIAN_RTOL {
        fails.push(format!("hessian rel err {worst_hess:e}"));
    }

    // Campaign reproducibility.
    let mut small = preset("fig2b")?;
    small.name = "p1_small".into();
    small.model.n_sites = 8;
    small.campaign.epsilon_list = vec![2.0, 0.0];
    small.campaign.n_noise_realizations = 2;
    small.campaign.n_seeds_per_noise = 2;
    small.dynamics.sweeps_measure = 2_000;
    small.dynamics.sweeps_thermalize = Some(500);
    small.observables.fixed_lag = Some(500);
    small.observables.max_lag = Some(500);
    let d1 = root.join("p1_a");
    let d2_ = root.join("p1_b");
    for d in [&d1, &d2_] {
        let _ = fs::remove_dir_all(d);
        let _ = run_campaign(&small, d);
    }
    let m1 = fs::read(d1.join("manifest.json")).unwrap_or_default();
    let m2 = fs::read(d2_.join("manifest.json")).unwrap_or_default();
    if m1.is_empty() || m1 != m2 {
        fails.push("campaign manifests differ".into());
    }

    // Exact recovery of a synthetic power law.
    let times: Vec<f64> = (1..=200).map(|k| k as f64).collect();
    let vals: Vec<f64> = times.iter().map(|t| 2.5 * t.powf(0.6)).collect();
    let series = DiffusionSeries {
        times: times.clone(),
        d4_mean: vals.clone(),
        d4_err: vec![0.0; times.len()],
        d2_mean: vals,
        d2_err: vec![0.0; times.len()],
        n_samples: vec![1; times.len()],
    };
    let f = hetchain::analysis::fit_power_law(&series, Some((10.0, 150.0)))?;
    if (f.nu_hat - 0.6).abs() > 1e-10 || (f.k_coeff / 2.5 - 1.0).abs() > 1e-10 {
        fails.push(format!("fit recovery {f}"));
    }

    let summary = format!(
        "rigid motion, identity, delta rel err {worst_delta:.1e}, lattice chi2 {stat:.1}/{crit:.1} ({dof} dof), hessian rel err {worst_hess:.1e}, reproducible campaign, exact fit recovery"
    );
    if fails.is_empty() {
        Ok((true, summary))
    } else {
        Ok((false, fails.join("; ")))
    }
}

fn main() {
    // Listing and filtering from `cargo test -- <filter>` are not supported;
    // `--list` reports the single target so tooling stays happy.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let root = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    fs::create_dir_all(&root).expect("create output root");
    let started = Instant::now();
    let mut results = vec![];
    let timed = |id: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        eprintln!("{id}: running");
        let o = f();
        eprintln!("{id}: {:.0}s", t.elapsed().as_secs_f64());
        debug_assert_eq!(o.id, id);
        o
    };

    results.push(timed("P1", &mut || outcome("P1", p1(&root))));
    results.push(timed("A1", &mut || outcome("A1", a1(&root))));
    let mut a2_manifest = None;
    results.push(timed("A2", &mut || match a2(&root) {
        Ok((ok, d, m)) => {
            a2_manifest = Some(m);
            Outcome { id: "A2", passed: ok, detail: d }
        }
        Err(e) => Outcome { id: "A2", passed: false, detail: format!("error: {e}") },
    }));
    results.push(timed("A5", &mut || outcome("A5", a5())));
    results.push(timed("A6", &mut || match &a2_manifest {
        Some(m) => outcome("A6", a6(&root, m)),
        None => Outcome { id: "A6", passed: false, detail: "globule campaign unavailable".into() },
    }));
    let hetero = hetero_spec().and_then(|s| run_fresh(&s, &root).map(|m| (s, m)));
    for (id, f) in [
        ("A3", a3 as fn(&CampaignSpec, &Manifest) -> Result<(bool, String)>),
        ("A4", a4),
        ("A7", a7),
    ] {
        results.push(match &hetero {
            Ok((s, m)) => outcome(id, f(s, m)),
            Err(e) => Outcome { id, passed: false, detail: format!("campaign error: {e}") },
        });
    }
    results.sort_by_key(|o| o.id);

    println!();
    for o in &results {
        println!("{} {}: {}", o.id, if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed = results.iter().filter(|o| !o.passed).count();
    println!(
        "\nacceptance: {} passed, {failed} failed in {:.0}s",
        results.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

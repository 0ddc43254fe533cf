use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hetchain::analysis::fit_power_law;
use hetchain::campaign::{preset, run_campaign, CampaignReport, CampaignSpec, PRESETS, THREADS_ENV};
use hetchain::dynamics::Checkpoint;
use hetchain::model::{generate_noise, NoiseDistribution};
use hetchain::oracle::{d4_curve, oracle_csv, ModeBasis, OracleParams};
use hetchain::spectral::{fit_alpha, hessian_spectrum, local_minimize_with, predict_nu, MinimizeOptions};
use hetchain::{DiffusionSeries, Error};

#[derive(Parser)]
#[command(name = "hetchain", version, about = "Heteropolymer chain dynamics: simulate, fit and cross-check diffusion exponents")]
#[command(after_help = format!("Set {THREADS_ENV} to limit the number of worker threads."))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run (or resume) a campaign described by a TOML file.
    Run {
        config: PathBuf,
        /// Output directory; defaults to `output_dir` in the file, then `runs/<name>`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named preset campaign, or print its configuration.
    Preset {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the preset as TOML and exit.
        #[arg(long)]
        dump: bool,
    },
    /// Fit D4 ~ k t^nu to a series CSV (`t,d4_mean,d4_err,...`).
    Fit {
        series: PathBuf,
        /// Explicit fit window instead of the automatic one.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"])]
        window: Option<Vec<f64>>,
    },
    /// Minimise a checkpointed conformation and fit its Hessian dispersion.
    Spectrum {
        checkpoint: PathBuf,
        /// Write `p,lambda_p` here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Use the stored conformation as is instead of minimising first.
        #[arg(long)]
        no_minimize: bool,
    },
    /// Print the analytic normal-mode D4(t) as CSV.
    Oracle {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        temperature: f64,
        #[arg(long, default_value_t = 1.0)]
        zeta: f64,
        #[arg(long, value_enum, default_value_t = Basis::Discrete)]
        basis: Basis,
        /// Largest time, in units of the Rouse time.
        #[arg(long, default_value_t = 10.0)]
        t_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Quenched coupling matrices.
    Noise {
        #[command(subcommand)]
        command: NoiseCommand,
    },
}

#[derive(Subcommand)]
enum NoiseCommand {
    /// Print the upper triangle of a coupling matrix.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "gaussian")]
        distribution: NoiseDistribution,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Basis {
    Discrete,
    Continuum,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` means the command ran but a verdict failed.
fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Run { config, out } => {
            let spec = CampaignSpec::load(&config)?;
            let dir = out
                .or_else(|| spec.output_dir.clone())
                .unwrap_or_else(|| Path::new("runs").join(&spec.name));
            campaign(&spec, &dir)
        }
        Command::Preset { name, out, dump } => {
            let spec = preset(&name).map_err(|e| match e {
                Error::UnknownPreset(n) => Error::UnknownPreset(format!("{n} (known: {})", PRESETS.join(", "))),
                other => other,
            })?;
            if dump {
                print!("{}", spec.to_toml()?);
                return Ok(true);
            }
            let dir = out.unwrap_or_else(|| Path::new("runs").join(&spec.name));
            campaign(&spec, &dir)
        }
        Command::Fit { series, window } => {
            let s = DiffusionSeries::from_csv(&hetchain::campaign::read_to_string(&series)?)?;
            let fit = fit_power_law(&s, window.map(|w| (w[0], w[1])))?;
            println!("{}", serde_json::to_string_pretty(&fit)?);
            Ok(true)
        }
        Command::Spectrum { checkpoint, csv, no_minimize } => {
            let ck = Checkpoint::read(&checkpoint)?;
            let noise = ck.noise()?;
            let conf = if no_minimize {
                ck.conformation.clone()
            } else {
                local_minimize_with(&ck.conformation, &ck.params, &noise, &MinimizeOptions::default())?.conformation
            };
            let spec = fit_alpha(&hessian_spectrum(&conf, &ck.params, &noise)?, ck.params.n_sites, None)?;
            if let Some(path) = csv {
                hetchain::campaign::write_atomic(&path, spec.to_csv().as_bytes())?;
            }
            let mut summary = spec.summary_json();
            if let Some(a) = spec.alpha_hat {
                summary["nu_predicted"] = predict_nu(a).map(serde_json::Value::from).unwrap_or(serde_json::Value::Null);
            }
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(true)
        }
        Command::Oracle { n, h, alpha, temperature, zeta, basis, t_max, points } => {
            let basis = match basis {
                Basis::Discrete => ModeBasis::Discrete,
                Basis::Continuum => ModeBasis::Continuum,
            };
            let op = OracleParams::harmonic(n, h, temperature, zeta)?.with_basis(basis).with_alpha(alpha)?;
            if points < 2 || !(t_max > 0.0) {
                return Err(Error::InvalidParams("need --points >= 2 and --t-max > 0".into()));
            }
            // Log-spaced over five decades below t_max.
            let hi = t_max * op.tau_r();
            let times: Vec<f64> =
                (0..points).map(|k| hi * 10f64.powf(-5.0 * (1.0 - k as f64 / (points - 1) as f64))).collect();
            print!("{}", oracle_csv(&times, &d4_curve(&times, &op)));
            Ok(true)
        }
        Command::Noise { command: NoiseCommand::Gen { n, seed, distribution } } => {
            print!("{}", generate_noise(n, seed, distribution)?.to_text());
            Ok(true)
        }
    }
}

fn campaign(spec: &CampaignSpec, dir: &Path) -> Result<bool, Error> {
    let CampaignReport { manifest, manifest_path, jobs_run, jobs_resumed } = run_campaign(spec, dir)?;
    eprintln!("{}: {jobs_run} jobs run, {jobs_resumed} resumed", manifest.name);
    for p in &manifest.points {
        match (&p.fit, &p.fit_error) {
            (Some(f), _) => println!("{}: {f}", p.label),
            (None, Some(e)) => println!("{}: fit failed: {e}", p.label),
            _ => {}
        }
    }
    for v in &manifest.verdicts {
        println!("{} {:?}: {}", if v.passed { "PASS" } else { "FAIL" }, v.check, v.detail);
    }
    println!("manifest: {}", manifest_path.display());
    Ok(manifest.all_passed)
}

//! Ensemble orchestration: configuration, presets, job execution with
//! resume, aggregation and the manifest.
//!
//! Output layout under the campaign directory:
//!
//! ```text
//! manifest.json
//! jobs/<point>/nNNN_sNNN/{curve.csv, fixed_lag.csv, checkpoint.txt, job.json}
//! points/<point>/{series.csv, point.json, oracle.csv, histogram.csv, ...}
//! ```

mod io;
mod run;
mod spec;

pub use io::{read_to_string, write_atomic};
pub use run::{
    derive_seed, plan_jobs, run_campaign, CampaignReport, JobFailure, JobOutput, JobSpec, Manifest, PointResult,
    Verdict, THREADS_ENV,
};
pub use spec::{
    point_label, preset, CampaignSection, CampaignSpec, Check, FitSection, ObservableSection, Point, Reference,
    ReferenceKind, DEFAULT_HETERO_A, PRESETS,
};

//! Experiment driver behind the `kerr-run` binary.
//!
//! A run is described by one TOML file ([`RunConfig`]). [`run`] executes it and
//! writes into the output directory:
//!
//! - `inputs.toml`, the fully expanded configuration (rerunnable as is),
//! - one or more CSV tables with a header row,
//! - `logs/*.jsonl` iteration logs, one per transmission solve,
//! - SVG plots and `record.json` with the scalar results.
//!
//! ```no_run
//! use kerr_interface::harness::{run, ExperimentKind, RunConfig};
//!
//! let mut config = RunConfig::new(ExperimentKind::ResidualTrace);
//! config.eps = vec![3e-4];
//! let record = run(&config, "out/trace".as_ref()).unwrap();
//! println!("{:?}", record.scalars);
//! ```

mod config;
mod experiments;
pub mod output;
pub mod plot;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

pub use config::{DomainSpec, EnvelopeSpec, ExperimentKind, ModeGridSpec, ProfileSpec, RunConfig};
pub use experiments::{run_audit, run_dispersion, run_eps_sweep, run_h_sweep, run_residual_trace};

use crate::ansatz::AnsatzError;
use crate::mode::ModeError;
use crate::profile::ProfileError;
use crate::transmission::SolverError;

/// Environment variable overriding the number of sweep points solved at once.
pub const THREADS_ENV: &str = "KERR_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("no localized mode: {0}")]
    NoMode(String),
    #[error("{excluded} of {total} solves did not converge")]
    PartialConvergence { excluded: usize, total: usize },
    #[error("audit failed: {}", .0.join("; "))]
    AuditFailure(Vec<String>),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error(transparent)]
    Ansatz(#[from] AnsatzError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl HarnessError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Profile(_) | Self::Solver(SolverError::Config(_)) => 2,
            Self::NoMode(_) => 3,
            Self::PartialConvergence { .. } => 4,
            Self::AuditFailure(_) => 5,
            _ => 1,
        }
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        Self::Output(e.to_string())
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        Self::Output(e.to_string())
    }
}

/// Summary of one run, written as `record.json`.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentRecord {
    pub experiment: ExperimentKind,
    pub inputs: RunConfig,
    pub scalars: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub flags: BTreeMap<String, bool>,
    /// Log-log slopes; only filled for sweeps with at least four usable points.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slopes: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub wall_time: f64,
}

impl ExperimentRecord {
    fn new(config: &RunConfig) -> Self {
        Self {
            experiment: config.experiment,
            inputs: config.clone(),
            scalars: BTreeMap::new(),
            flags: BTreeMap::new(),
            slopes: None,
            warnings: Vec::new(),
            wall_time: 0.0,
        }
    }

    fn scalar(&mut self, key: &str, v: f64) {
        self.scalars.insert(key.to_string(), v);
    }

    fn flag(&mut self, key: &str, v: bool) {
        self.flags.insert(key.to_string(), v);
    }

    fn warn(&mut self, msg: String) {
        log::warn!("{msg}");
        self.warnings.push(msg);
    }
}

/// Number of worker threads for sweep points: `KERR_THREADS` if set, else the
/// available parallelism.
pub fn thread_count() -> Result<usize, HarnessError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(HarnessError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Maps `f` over `items` on up to `threads` workers, keeping input order.
pub(crate) fn parallel_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(usize, &T) -> R + Sync) -> Vec<R> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    let threads = threads.clamp(1, items.len().max(1));
    if threads == 1 {
        return items.iter().enumerate().map(|(i, x)| f(i, x)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(i, &items[i]);
                slots.lock().expect("worker panicked")[i] = Some(r);
            });
        }
    });
    slots.into_inner().expect("worker panicked").into_iter().map(|r| r.expect("every slot filled")).collect()
}

/// Validates `config`, runs its experiment and writes all outputs under `out`.
///
/// Outputs are written before a partial-convergence or audit error is returned.
pub fn run(config: &RunConfig, out: &Path) -> Result<ExperimentRecord, HarnessError> {
    config.validate()?;
    let threads = thread_count()?;
    // sweep points run concurrently, each factorization stays single threaded
    faer::set_global_parallelism(faer::Par::Seq);
    std::fs::create_dir_all(out)?;
    output::write_atomic(&out.join("inputs.toml"), config.to_toml().as_bytes())?;

    let start = Instant::now();
    let mut record = ExperimentRecord::new(config);
    let outcome = match config.experiment {
        ExperimentKind::Dispersion => run_dispersion(config, out, &mut record),
        ExperimentKind::EpsSweep => run_eps_sweep(config, out, threads, &mut record),
        ExperimentKind::HSweep => run_h_sweep(config, out, threads, &mut record),
        ExperimentKind::ResidualTrace => run_residual_trace(config, out, &mut record),
        ExperimentKind::Audit => run_audit(config, out, threads, &mut record),
    };
    record.wall_time = start.elapsed().as_secs_f64();
    // keep whatever was produced, even on failure
    if !matches!(outcome, Err(HarnessError::Io(_) | HarnessError::Output(_))) {
        output::write_json(&out.join("record.json"), &record)?;
    }
    outcome.map(|()| record)
}

//! Monte-Carlo experiments: one trial, p_e sweeps, population sweeps and the
//! threshold search.
//!
//! Every random draw comes from a stream labelled by its role and trial
//! index, so trial `t` sees the same payloads and the same uniform erasure
//! draws at every p_e and for every code variant. Erasure patterns are
//! therefore nested across p_e, and comparisons between variants are paired.

mod report;
mod search;

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::channel::{transmit, ChannelKind};
use crate::codec::{
    decode, encode, CodeConfig, CodeError, CodeParams, CodeRegistry, Codeword, DecodePolicy, GeneratorSet,
    DEFAULT_LIST_CAP,
};
use crate::gf2::{BitVector, RngStream};
use crate::metrics::{aggregate, MetricsError, Summary, TrialOutcome};

pub use report::{write_csv, write_json, CSV_HEADER};
pub use search::{find_max_pe, MaxPeResult, Probe, SearchOptions};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid experiment: {0}")]
    Spec(String),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CodebookMode {
    /// New generator matrices for every trial.
    #[default]
    Fresh,
    /// One codebook shared by all trials.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub users: usize,
    pub code: String,
    pub params: CodeParams,
    pub channel: ChannelKind,
    pub pe: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub codebook: CodebookMode,
    /// `None` keeps the scheme's default for the channel.
    #[serde(default)]
    pub sic: Option<bool>,
    pub list_cap: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            users: 100,
            code: "ellc".into(),
            params: CodeParams::default(),
            channel: ChannelKind::BChannel,
            pe: vec![0.05],
            trials: 500,
            seed: 1,
            codebook: CodebookMode::Fresh,
            sic: None,
            list_cap: DEFAULT_LIST_CAP,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.users == 0 {
            return Err(SimError::Spec("need at least one user".into()));
        }
        if self.trials == 0 {
            return Err(SimError::Spec("need at least one trial".into()));
        }
        if let Some(p) = self.pe.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(SimError::Spec(format!("erasure probability {p} is outside [0, 1]")));
        }
        if self.list_cap == 0 {
            return Err(SimError::Spec("list cap must be positive".into()));
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the spec's JSON form.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// A validated spec with its code layout and decoding policy resolved.
pub struct Experiment {
    pub spec: ExperimentSpec,
    pub cfg: CodeConfig,
    pub policy: DecodePolicy,
    fixed: Option<GeneratorSet>,
}

impl Experiment {
    pub fn new(spec: ExperimentSpec, registry: &CodeRegistry) -> Result<Self, SimError> {
        spec.validate()?;
        let scheme = registry.get(&spec.code)?;
        let cfg = scheme.config(&spec.params)?;
        let policy = scheme.policy(spec.channel, spec.sic, spec.list_cap)?;
        let fixed = (spec.codebook == CodebookMode::Fixed).then(|| GeneratorSet::build(&cfg, spec.seed, "codebook"));
        Ok(Experiment {
            spec,
            cfg,
            policy,
            fixed,
        })
    }

    pub fn generators(&self, trial: u64) -> GeneratorSet {
        match &self.fixed {
            Some(g) => g.clone(),
            None => GeneratorSet::build(&self.cfg, self.spec.seed, &format!("codebook/{trial}")),
        }
    }

    /// The first `users` payloads of trial `trial`; larger populations extend
    /// smaller ones.
    pub fn payloads(&self, trial: u64, users: usize) -> Vec<BitVector> {
        let mut s = RngStream::new(self.spec.seed, format!("payload/{trial}"));
        let b = self.cfg.payload_bits();
        (0..users)
            .map(|_| {
                let mut bits = Vec::with_capacity(b);
                while bits.len() < b {
                    let w = s.next_u64();
                    bits.extend((0..64.min(b - bits.len())).map(|i| (w >> i) & 1 == 1));
                }
                BitVector::from_bits(bits)
            })
            .collect()
    }

    pub fn run_trial(&self, pe: f64, trial: u64) -> Result<TrialOutcome, SimError> {
        self.run_trial_with_users(pe, trial, self.spec.users)
    }

    pub fn run_trial_with_users(&self, pe: f64, trial: u64, users: usize) -> Result<TrialOutcome, SimError> {
        let start = Instant::now();
        let gens = self.generators(trial);
        let transmitted: Vec<Codeword> = self
            .payloads(trial, users)
            .iter()
            .map(|p| encode(p, &self.cfg, &gens))
            .collect::<Result<_, _>>()?;
        let mut erasures = RngStream::new(self.spec.seed, format!("erasure/{trial}"));
        let y = transmit(&transmitted, pe, self.spec.channel, &mut erasures);
        let decoded = decode(&y, &self.cfg, &gens, &self.policy);
        Ok(TrialOutcome {
            transmitted,
            recovered: decoded.codewords,
            decoder_overload: decoded.overloaded,
            seconds: start.elapsed().as_secs_f64(),
        })
    }

    /// Trials `first..first + count` at one operating point, in trial order.
    pub fn run_trials(&self, pe: f64, users: usize, first: u64, count: usize) -> Result<Vec<TrialOutcome>, SimError> {
        (first..first + count as u64)
            .into_par_iter()
            .map(|t| self.run_trial_with_users(pe, t, users))
            .collect()
    }

    pub fn run_point(&self, pe: f64, users: usize) -> Result<Summary, SimError> {
        Ok(aggregate(&self.run_trials(pe, users, 0, self.spec.trials)?)?)
    }
}

/// One aggregated row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub swept_var: String,
    pub value: f64,
    #[serde(flatten)]
    pub summary: Summary,
    /// Elapsed time for the whole point; JSON only.
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub spec: ExperimentSpec,
    pub config_hash: String,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses `ELLC_WORKERS` or all cores.
    pub workers: Option<usize>,
    /// Print one line per finished point to standard error.
    pub progress: bool,
}

pub(crate) fn with_pool<T: Send>(opts: &RunOptions, f: impl FnOnce() -> T + Send) -> Result<T, SimError> {
    let workers = opts
        .workers
        .or_else(|| std::env::var("ELLC_WORKERS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

pub(crate) fn progress_line(opts: &RunOptions, var: &str, value: f64, s: &Summary, wall: f64) {
    if opts.progress {
        eprintln!(
            "{var}={value}: trials {} pdp {:.4} (±{:.4}) php {:.5} overload {:.3} [{wall:.1}s]",
            s.trials, s.mean_pdp, s.stderr_pdp, s.mean_php, s.overload_rate
        );
    }
}

/// All points along `spec.pe` with `spec.users` users.
pub fn run_sweep(exp: &Experiment, opts: &RunOptions) -> Result<Report, SimError> {
    with_pool(opts, || {
        let mut rows = Vec::new();
        for &pe in &exp.spec.pe {
            let start = Instant::now();
            let summary = exp.run_point(pe, exp.spec.users)?;
            progress_line(opts, "pe", pe, &summary, start.elapsed().as_secs_f64());
            rows.push(Row {
                swept_var: "pe".into(),
                value: pe,
                summary,
                wall_seconds: start.elapsed().as_secs_f64(),
            });
        }
        Ok(Report {
            spec: exp.spec.clone(),
            config_hash: exp.spec.config_hash(),
            rows,
        })
    })?
}

/// Varies the population at the single erasure probability in `spec.pe`.
pub fn scale(exp: &Experiment, users: &[usize], opts: &RunOptions) -> Result<Report, SimError> {
    let [pe] = exp.spec.pe[..] else {
        return Err(SimError::Spec("a population sweep takes exactly one erasure probability".into()));
    };
    if users.contains(&0) {
        return Err(SimError::Spec("need at least one user".into()));
    }
    with_pool(opts, || {
        let mut rows = Vec::new();
        for &k in users {
            let start = Instant::now();
            let summary = exp.run_point(pe, k)?;
            progress_line(opts, "users", k as f64, &summary, start.elapsed().as_secs_f64());
            rows.push(Row {
                swept_var: "users".into(),
                value: k as f64,
                summary,
                wall_seconds: start.elapsed().as_secs_f64(),
            });
        }
        Ok(Report {
            spec: exp.spec.clone(),
            config_hash: exp.spec.config_hash(),
            rows,
        })
    })?
}

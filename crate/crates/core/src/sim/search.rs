//! Largest erasure probability meeting a PDP target.

use serde::{Deserialize, Serialize};

use super::{progress_line, with_pool, Experiment, Row, RunOptions, SimError};
use crate::metrics::{aggregate, TrialOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub target_pdp: f64,
    /// Stop once the bracket is narrower than this.
    pub resolution: f64,
    pub trials: usize,
    /// Probes never use fewer trials than this.
    pub min_trials: usize,
    pub lo: f64,
    pub hi: f64,
    /// End a probe early, in steps of `min_trials`, once a Hoeffding bound
    /// puts its side of the target beyond doubt (error below 1e-6).
    pub early_stop: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            target_pdp: 0.1,
            resolution: 0.002,
            trials: 200,
            min_trials: 50,
            lo: 0.0,
            hi: 0.5,
            early_stop: true,
        }
    }
}

const HOEFFDING_DELTA: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    #[serde(flatten)]
    pub row: Row,
    pub meets_target: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxPeResult {
    /// Lower edge of the final bracket.
    pub pe: f64,
    pub bracket: (f64, f64),
    pub options: SearchOptions,
    pub probes: Vec<Probe>,
    pub warnings: Vec<String>,
}

fn settled(outcomes: &[TrialOutcome], target: f64) -> bool {
    let n = outcomes.len() as f64;
    let mean = outcomes.iter().map(|o| o.pdp().unwrap_or(0.0)).sum::<f64>() / n;
    let gap = mean - target;
    2.0 * (-2.0 * n * gap * gap).exp() <= HOEFFDING_DELTA
}

fn probe(exp: &Experiment, pe: f64, opts: &SearchOptions, run: &RunOptions) -> Result<Probe, SimError> {
    let start = std::time::Instant::now();
    let total = opts.trials.max(opts.min_trials);
    let step = if opts.early_stop { opts.min_trials.max(1) } else { total };
    let mut outcomes = Vec::with_capacity(total);
    while outcomes.len() < total {
        let count = step.min(total - outcomes.len());
        outcomes.extend(exp.run_trials(pe, exp.spec.users, outcomes.len() as u64, count)?);
        if opts.early_stop && outcomes.len() < total && settled(&outcomes, opts.target_pdp) {
            break;
        }
    }
    let summary = aggregate(&outcomes)?;
    progress_line(run, "pe", pe, &summary, start.elapsed().as_secs_f64());
    Ok(Probe {
        meets_target: summary.mean_pdp <= opts.target_pdp,
        row: Row {
            swept_var: "pe".into(),
            value: pe,
            summary,
            wall_seconds: start.elapsed().as_secs_f64(),
        },
    })
}

/// Bisection on p_e. Every probe reuses trial indices `0..`, so probes share
/// payloads and their erasure patterns are nested.
pub fn find_max_pe(exp: &Experiment, opts: &SearchOptions, run: &RunOptions) -> Result<MaxPeResult, SimError> {
    if !(0.0..=1.0).contains(&opts.lo) || !(opts.lo..=1.0).contains(&opts.hi) {
        return Err(SimError::Spec(format!("bad search interval [{}, {}]", opts.lo, opts.hi)));
    }
    if opts.resolution <= 0.0 || opts.trials == 0 {
        return Err(SimError::Spec("resolution and trials must be positive".into()));
    }
    with_pool(run, || {
        let mut warnings = Vec::new();
        if opts.trials < opts.min_trials {
            warnings.push(format!(
                "raised trials per probe from {} to the floor of {}",
                opts.trials, opts.min_trials
            ));
        }
        let mut probes = Vec::new();
        let (mut lo, mut hi) = (opts.lo, opts.hi);
        let top = probe(exp, hi, opts, run)?;
        let done = top.meets_target;
        probes.push(top);
        if done {
            lo = hi;
        } else {
            while hi - lo >= opts.resolution {
                let mid = 0.5 * (lo + hi);
                let p = probe(exp, mid, opts, run)?;
                if p.meets_target {
                    lo = mid;
                } else {
                    hi = mid;
                }
                probes.push(p);
            }
            if !probes.iter().any(|p| p.meets_target) {
                warnings.push(format!("no probe met the target; returning the interval start {lo}"));
            }
        }
        let mut sorted: Vec<&Probe> = probes.iter().collect();
        sorted.sort_by(|a, b| a.row.value.total_cmp(&b.row.value));
        for w in sorted.windows(2) {
            if w[1].row.summary.mean_pdp < w[0].row.summary.mean_pdp {
                warnings.push(format!(
                    "PDP decreases from p_e={} ({:.4}) to p_e={} ({:.4})",
                    w[0].row.value, w[0].row.summary.mean_pdp, w[1].row.value, w[1].row.summary.mean_pdp
                ));
            }
        }
        if run.progress {
            for w in &warnings {
                eprintln!("warning: {w}");
            }
        }
        Ok(MaxPeResult {
            pe: lo,
            bracket: (lo, hi),
            options: *opts,
            probes,
            warnings,
        })
    })?
}

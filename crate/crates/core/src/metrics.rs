//! Payload dropping and hallucination probabilities.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::Codeword;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("PDP is undefined without transmitted codewords")]
    NoUsers,
    #[error("cannot aggregate an empty set of outcomes")]
    NoOutcomes,
}

/// What one Monte-Carlo trial sent and recovered.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// One codeword per user, duplicates retained.
    pub transmitted: Vec<Codeword>,
    /// Decoder output; duplicate-free.
    pub recovered: Vec<Codeword>,
    pub decoder_overload: bool,
    pub seconds: f64,
}

impl TrialOutcome {
    pub fn pdp(&self) -> Result<f64, MetricsError> {
        pdp(&self.transmitted, &self.recovered)
    }

    pub fn php(&self) -> f64 {
        php(&self.transmitted, &self.recovered)
    }

    pub fn dropped(&self) -> usize {
        let got: HashSet<&Codeword> = self.recovered.iter().collect();
        self.transmitted.iter().filter(|c| !got.contains(c)).count()
    }

    pub fn hallucinated(&self) -> usize {
        let sent: HashSet<&Codeword> = self.transmitted.iter().collect();
        self.recovered.iter().filter(|c| !sent.contains(c)).count()
    }
}

/// Fraction of users whose codeword is missing from `recovered`.
pub fn pdp(transmitted: &[Codeword], recovered: &[Codeword]) -> Result<f64, MetricsError> {
    if transmitted.is_empty() {
        return Err(MetricsError::NoUsers);
    }
    let got: HashSet<&Codeword> = recovered.iter().collect();
    let dropped = transmitted.iter().filter(|c| !got.contains(c)).count();
    Ok(dropped as f64 / transmitted.len() as f64)
}

/// Fraction of distinct recovered codewords nobody sent; 0 when nothing was
/// recovered.
pub fn php(transmitted: &[Codeword], recovered: &[Codeword]) -> f64 {
    let recovered: HashSet<&Codeword> = recovered.iter().collect();
    if recovered.is_empty() {
        return 0.0;
    }
    let sent: HashSet<&Codeword> = transmitted.iter().collect();
    let bad = recovered.iter().filter(|c| !sent.contains(*c)).count();
    bad as f64 / recovered.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub mean_pdp: f64,
    pub stderr_pdp: f64,
    pub mean_php: f64,
    pub stderr_php: f64,
    pub overload_rate: f64,
    /// Dropped over transmitted, summed across trials.
    pub pooled_pdp: f64,
    /// Hallucinated over recovered, summed across trials.
    pub pooled_php: f64,
    pub seconds: f64,
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Per-trial PDP/PHP averaged across trials, in the order given.
pub fn aggregate(outcomes: &[TrialOutcome]) -> Result<Summary, MetricsError> {
    if outcomes.is_empty() {
        return Err(MetricsError::NoOutcomes);
    }
    let pdps = outcomes.iter().map(TrialOutcome::pdp).collect::<Result<Vec<_>, _>>()?;
    let phps: Vec<f64> = outcomes.iter().map(TrialOutcome::php).collect();
    let (mean_pdp, stderr_pdp) = mean_and_stderr(&pdps);
    let (mean_php, stderr_php) = mean_and_stderr(&phps);
    let sent: usize = outcomes.iter().map(|o| o.transmitted.len()).sum();
    let got: usize = outcomes.iter().map(|o| o.recovered.len()).sum();
    let dropped: usize = outcomes.iter().map(TrialOutcome::dropped).sum();
    let bad: usize = outcomes.iter().map(TrialOutcome::hallucinated).sum();
    Ok(Summary {
        trials: outcomes.len(),
        mean_pdp,
        stderr_pdp,
        mean_php,
        stderr_php,
        overload_rate: outcomes.iter().filter(|o| o.decoder_overload).count() as f64 / outcomes.len() as f64,
        pooled_pdp: dropped as f64 / sent as f64,
        pooled_php: if got == 0 { 0.0 } else { bad as f64 / got as f64 },
        seconds: outcomes.iter().map(|o| o.seconds).sum(),
    })
}

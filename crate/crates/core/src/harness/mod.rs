//! Seeded ensembles, histograms, goodness-of-fit and peak studies.
//!
//! Every output here is a pure function of (experiment, n, master seed):
//! trial `i` always draws from stream `i` of the master seed, whichever
//! thread runs it.

mod chi2;
mod experiment;
mod sweep;

pub use chi2::{chi_square_test, critical_value, ChiSquare, ALPHAS, CRITICAL};
pub use experiment::{run_trials, Experiment, Setup, TrialOutcome};
pub use sweep::{asymmetry_sweep, Family, PeakReport, SweepParameter};

use crate::pipeline::PipelineError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("trial {trial}: {source}")]
    Trial { trial: u64, source: PipelineError },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("{total} counts are too few for {bins} bins (need 5 per bin)")]
    InsufficientCounts { total: u64, bins: usize },
    #[error("no quantile table for alpha = {0}")]
    UnsupportedAlpha(f64),
    #[error("no quantile table for {0} degrees of freedom")]
    UnsupportedDf(usize),
    #[error("histogram has {observed} bins but {expected} probabilities were given")]
    LengthMismatch { observed: usize, expected: usize },
    #[error("sample has no variance")]
    DegenerateSample,
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("{0}")]
    InvalidParameter(String),
}

/// Counts per labelled outcome bin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeHistogram {
    pub bins: Vec<(String, u64)>,
    pub total: u64,
}

impl OutcomeHistogram {
    pub fn new(labels: Vec<String>) -> Self {
        Self {
            bins: labels.into_iter().map(|l| (l, 0)).collect(),
            total: 0,
        }
    }

    pub fn from_counts(labels: Vec<String>, counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        Self {
            bins: labels.into_iter().zip(counts).collect(),
            total,
        }
    }

    pub fn record(&mut self, bin: usize) {
        self.bins[bin].1 += 1;
        self.total += 1;
    }

    pub fn counts(&self) -> Vec<u64> {
        self.bins.iter().map(|b| b.1).collect()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.bins
            .iter()
            .map(|b| if self.total == 0 { 0.0 } else { b.1 as f64 / self.total as f64 })
            .collect()
    }
}

/// Max-bin mass of a histogram. `None` for an empty histogram.
pub fn peak_metric(h: &OutcomeHistogram) -> Option<f64> {
    if h.total == 0 {
        return None;
    }
    let max = h.bins.iter().map(|b| b.1).max().unwrap_or(0);
    Some(max as f64 / h.total as f64)
}

/// Pearson correlation of paired samples, clamped to `[-1, 1]`.
pub fn correlation(pairs: &[(f64, f64)]) -> Result<f64, HarnessError> {
    let n = pairs.len() as f64;
    if pairs.len() < 2 {
        return Err(HarnessError::DegenerateSample);
    }
    let (ma, mb) = pairs
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (ma, mb) = (ma / n, mb / n);
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in pairs {
        let (dx, dy) = (x - ma, y - mb);
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va == 0.0 || vb == 0.0 {
        return Err(HarnessError::DegenerateSample);
    }
    Ok((cov / (va * vb).sqrt()).clamp(-1.0, 1.0))
}

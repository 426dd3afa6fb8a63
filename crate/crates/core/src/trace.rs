//! Seeded random stream that records every decision it feeds.
//!
//! Every stochastic choice in the simulator consumes exactly one uniform draw
//! from a [`TracedRng`], tagged with the [`Decision`] it served. The tag list
//! is what replay and the per-interaction audits compare against.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    /// Where a fluctuation happens.
    Position,
    /// Which entry path survives.
    Path,
    /// Which exit particle types come out.
    Channel,
    /// Which candidate shares a fluctuation.
    Partner,
    /// Final path selection when an apparatus reads out its detector.
    Readout,
    /// Plain sampling outside the interaction process (tests, tools).
    Sample,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Decision::Position => "position",
            Decision::Path => "path",
            Decision::Channel => "channel",
            Decision::Partner => "partner",
            Decision::Readout => "readout",
            Decision::Sample => "sample",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub decision: Decision,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct TracedRng {
    rng: ChaCha8Rng,
    seed: u64,
    stream: u64,
    trace: Vec<Draw>,
    recording: bool,
}

impl TracedRng {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            stream: 0,
            trace: Vec::new(),
            recording: true,
        }
    }

    /// Independent stream for trial `trial` of a run seeded with `master_seed`.
    ///
    /// Uses the ChaCha stream selector, so trial streams never overlap and the
    /// result does not depend on which thread runs which trial.
    pub fn for_trial(master_seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(trial);
        Self {
            rng,
            seed: master_seed,
            stream: trial,
            trace: Vec::new(),
            recording: true,
        }
    }

    /// Stops keeping the trace. Long sampling loops use this to stay O(1) in memory.
    pub fn without_trace(mut self) -> Self {
        self.recording = false;
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// ChaCha stream index; the trial index for [`TracedRng::for_trial`].
    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn is_recording(&self) -> bool {
        self.recording
    }

    /// One uniform draw in `[0, 1)`.
    pub fn draw(&mut self, decision: Decision) -> f64 {
        let value: f64 = self.rng.random();
        if self.recording {
            self.trace.push(Draw { decision, value });
        }
        value
    }

    pub fn trace(&self) -> &[Draw] {
        &self.trace
    }

    /// Number of recorded draws, used to slice out per-interaction windows.
    pub fn mark(&self) -> usize {
        self.trace.len()
    }

    pub fn since(&self, mark: usize) -> &[Draw] {
        &self.trace[mark.min(self.trace.len())..]
    }

    pub fn take_trace(&mut self) -> Vec<Draw> {
        std::mem::take(&mut self.trace)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = TracedRng::from_seed(7);
        let mut b = TracedRng::from_seed(7);
        for _ in 0..16 {
            assert_eq!(a.draw(Decision::Sample), b.draw(Decision::Sample));
        }
        assert_eq!(a.trace(), b.trace());
    }

    #[test]
    fn trial_streams_differ() {
        let mut a = TracedRng::for_trial(7, 0);
        let mut b = TracedRng::for_trial(7, 1);
        let xs: Vec<f64> = (0..4).map(|_| a.draw(Decision::Sample)).collect();
        let ys: Vec<f64> = (0..4).map(|_| b.draw(Decision::Sample)).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn untraced_stream_matches_traced_values() {
        let mut a = TracedRng::from_seed(3);
        let mut b = TracedRng::from_seed(3).without_trace();
        assert_eq!(a.draw(Decision::Path), b.draw(Decision::Path));
        assert!(b.trace().is_empty());
        assert_eq!(a.trace().len(), 1);
    }
}

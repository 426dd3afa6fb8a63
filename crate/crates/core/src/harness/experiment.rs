use rayon::prelude::*;

use super::{HarnessError, OutcomeHistogram};
use crate::constants::{Constants, ParticleType};
use crate::engine::{AmplitudeMap, InteractionConfig, InteractionEngine};
use crate::pathspace::{
    born_probabilities, Amplitude, EntanglementRegistry, PathRow, PathSampler, PathState, PathTable,
};
use crate::pipeline::{run_measurement, Apparatus, EprSetup, MeasurementRecord, PipelineError, Stage};
use crate::trace::{Decision, TracedRng};

/// What one trial does.
#[derive(Debug, Clone, PartialEq)]
pub enum Setup {
    /// Draw one row of a single-particle collection.
    Born { ptype: ParticleType, rows: Vec<(PathState, Amplitude)> },
    /// Measure one particle `repeats` times in a row with the same apparatus.
    Single {
        ptype: ParticleType,
        input: Vec<(PathState, Amplitude)>,
        apparatus: Apparatus,
        repeats: usize,
    },
    /// Measure both members of an entangled pair; `b_first` swaps the order.
    Epr { setup: EprSetup, b_first: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub constants: Constants,
    pub setup: Setup,
}

/// Result of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    /// Index into [`Experiment::labels`].
    pub bin: usize,
    pub records: Vec<MeasurementRecord>,
}

impl Experiment {
    pub fn new(setup: Setup) -> Self {
        Self {
            constants: Constants::default(),
            setup,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidParameter(m.into()));
        match &self.setup {
            Setup::Born { rows, .. } => {
                PathTable::new(1, rows.iter().map(|(s, a)| PathRow::single(s.clone(), *a)).collect())
                    .map_err(PipelineError::from)?;
            }
            Setup::Single { apparatus, repeats, .. } => {
                apparatus.validate()?;
                if *repeats == 0 {
                    return bad("repeats must be at least 1");
                }
            }
            Setup::Epr { setup, .. } => {
                setup.apparatus_a.validate()?;
                setup.apparatus_b.validate()?;
                PathTable::new(2, setup.rows.clone()).map_err(PipelineError::from)?;
            }
        }
        Ok(())
    }

    fn config(&self) -> InteractionConfig {
        match &self.setup {
            Setup::Born { .. } => InteractionConfig::default(),
            Setup::Single { apparatus, .. } => apparatus.config.clone(),
            Setup::Epr { setup, .. } => setup.apparatus_a.config.clone(),
        }
    }

    pub fn engine(&self) -> Result<InteractionEngine, HarnessError> {
        Ok(InteractionEngine::new(self.config()).map_err(PipelineError::from)?)
    }

    /// Outcome bin labels; repeated or paired readings join with `/`.
    pub fn labels(&self) -> Vec<String> {
        match &self.setup {
            Setup::Born { rows, .. } => (0..rows.len()).map(|i| format!("r{i}")).collect(),
            Setup::Single { apparatus, repeats, .. } => {
                let base = apparatus.detector.labels();
                let mut out = vec![String::new()];
                for _ in 0..*repeats {
                    out = out
                        .iter()
                        .flat_map(|p| base.iter().map(move |l| if p.is_empty() { l.clone() } else { format!("{p}/{l}") }))
                        .collect();
                }
                out
            }
            Setup::Epr { setup, .. } => {
                let b = setup.apparatus_b.detector.labels();
                setup
                    .apparatus_a
                    .detector
                    .labels()
                    .iter()
                    .flat_map(|a| b.iter().map(move |b| format!("{a}/{b}")))
                    .collect()
            }
        }
    }

    /// Runs trial `trial` of `master_seed`. With `trace` off the records
    /// carry no draws, which keeps long runs lean.
    pub fn run_trial(
        &self,
        engine: &mut InteractionEngine,
        master_seed: u64,
        trial: u64,
        trace: bool,
    ) -> Result<TrialOutcome, PipelineError> {
        let mut rng = TracedRng::for_trial(master_seed, trial);
        if !trace {
            rng = rng.without_trace();
        }
        let mut registry = EntanglementRegistry::new(self.constants);
        match &self.setup {
            Setup::Born { ptype, rows } => {
                let p = registry.spawn(*ptype, rows.clone())?;
                let cid = registry.particle(p)?.collection;
                let sampler = PathSampler::new(registry.collection(cid)?.table())?;
                let row = sampler.sample(&mut rng, Decision::Sample);
                let collapse = registry.collapse(cid, row)?;
                let record = MeasurementRecord {
                    stages: vec![],
                    detector_bin: row,
                    detector_label: format!("r{row}"),
                    value: row as f64,
                    final_state: collapse.states[0].clone(),
                    seed: master_seed,
                    trial,
                    draws: rng.trace().to_vec(),
                };
                Ok(TrialOutcome {
                    bin: row,
                    records: vec![record],
                })
            }
            Setup::Single {
                ptype,
                input,
                apparatus,
                repeats,
            } => {
                let mut p = registry.spawn(*ptype, input.clone())?;
                let width = apparatus.detector.bins.len();
                let mut bin = 0;
                let mut records = Vec::with_capacity(*repeats);
                for _ in 0..*repeats {
                    let m = run_measurement(apparatus, engine, &mut registry, p, &mut rng)?;
                    bin = bin * width + m.record.detector_bin;
                    p = m.particle;
                    records.push(m.record);
                }
                Ok(TrialOutcome { bin, records })
            }
            Setup::Epr { setup, b_first } => {
                let (_, a, b) = setup.spawn(&mut registry)?;
                let (ra, rb) = if *b_first {
                    let rb = run_measurement(&setup.apparatus_b, engine, &mut registry, b, &mut rng)?.record;
                    let ra = run_measurement(&setup.apparatus_a, engine, &mut registry, a, &mut rng)?.record;
                    (ra, rb)
                } else {
                    let ra = run_measurement(&setup.apparatus_a, engine, &mut registry, a, &mut rng)?.record;
                    let rb = run_measurement(&setup.apparatus_b, engine, &mut registry, b, &mut rng)?.record;
                    (ra, rb)
                };
                let bin = ra.detector_bin * setup.apparatus_b.detector.bins.len() + rb.detector_bin;
                let records = if *b_first { vec![rb, ra] } else { vec![ra, rb] };
                Ok(TrialOutcome { bin, records })
            }
        }
    }

    /// Exact outcome distribution over [`Experiment::labels`], when every
    /// stage is a declared map. `None` for experiments with lepton stages.
    pub fn expected(&self) -> Result<Option<Vec<f64>>, HarnessError> {
        let born = |rows: &[(PathState, Amplitude)]| -> Result<Vec<(PathState, f64)>, HarnessError> {
            let t = PathTable::new(1, rows.iter().map(|(s, a)| PathRow::single(s.clone(), *a)).collect())
                .map_err(PipelineError::from)?;
            let p = born_probabilities(&t).map_err(PipelineError::from)?;
            Ok(rows.iter().map(|r| r.0.clone()).zip(p).collect())
        };
        match &self.setup {
            Setup::Born { rows, .. } => Ok(Some(born(rows)?.into_iter().map(|r| r.1).collect())),
            Setup::Single {
                input,
                apparatus,
                repeats,
                ..
            } => {
                let width = apparatus.detector.bins.len();
                let mut dist: Vec<(usize, PathState, f64)> =
                    born(input)?.into_iter().map(|(s, p)| (0, s, p)).collect();
                for _ in 0..*repeats {
                    let mut next: Vec<(usize, PathState, f64)> = Vec::new();
                    for (bin, s, p) in dist {
                        let Some(outs) = readout_distribution(apparatus, &s)? else {
                            return Ok(None);
                        };
                        for (b, f, q) in outs {
                            merge3(&mut next, bin * width + b, f, p * q);
                        }
                    }
                    dist = next;
                }
                let mut out = vec![0.0; width.pow(*repeats as u32)];
                for (bin, _, p) in dist {
                    out[bin] += p;
                }
                Ok(Some(out))
            }
            Setup::Epr { setup, .. } => {
                let t = PathTable::new(2, setup.rows.clone()).map_err(PipelineError::from)?;
                let p = born_probabilities(&t).map_err(PipelineError::from)?;
                let nb = setup.apparatus_b.detector.bins.len();
                let mut out = vec![0.0; setup.apparatus_a.detector.bins.len() * nb];
                for (row, pr) in t.rows().iter().zip(p) {
                    let (Some(da), Some(db)) = (
                        readout_distribution(&setup.apparatus_a, &row.states[0])?,
                        readout_distribution(&setup.apparatus_b, &row.states[1])?,
                    ) else {
                        return Ok(None);
                    };
                    for (ba, _, qa) in &da {
                        for (bb, _, qb) in &db {
                            out[ba * nb + bb] += pr * qa * qb;
                        }
                    }
                }
                Ok(Some(out))
            }
        }
    }
}

fn merge3(into: &mut Vec<(usize, PathState, f64)>, bin: usize, s: PathState, p: f64) {
    match into.iter_mut().find(|(b, t, _)| *b == bin && *t == s) {
        Some(e) => e.2 += p,
        None => into.push((bin, s, p)),
    }
}

/// Pushes one definite state through every stage of `apparatus` and returns
/// `(bin, final state, probability)` triples.
fn readout_distribution(
    apparatus: &Apparatus,
    state: &PathState,
) -> Result<Option<Vec<(usize, PathState, f64)>>, HarnessError> {
    let mut dist = vec![(state.clone(), 1.0)];
    for stage in &apparatus.stages {
        let map: &dyn AmplitudeMap = match stage {
            Stage::Field(f) => f,
            Stage::Screen(s) => s,
            Stage::Lepton(_) => return Ok(None),
        };
        let mut next: Vec<(PathState, f64)> = Vec::new();
        for (s, p) in dist {
            let rows = map.project(&s).map_err(PipelineError::from)?;
            let total: f64 = rows.iter().map(|r| r.1.norm_sqr()).sum();
            for (t, a) in rows {
                let w = a.norm_sqr();
                if w == 0.0 {
                    continue;
                }
                match next.iter_mut().find(|e| e.0 == t) {
                    Some(e) => e.1 += p * w / total,
                    None => next.push((t, p * w / total)),
                }
            }
        }
        dist = next;
    }
    let mut out = Vec::new();
    for (s, p) in dist {
        let v = apparatus.detector.observable.value(&s)?;
        let b = apparatus
            .detector
            .bin_of(v)
            .ok_or(PipelineError::DetectorMiss { value: v })?;
        merge3(&mut out, b, s, p);
    }
    Ok(Some(out))
}

/// Runs `n` independent trials and histograms their outcome bins.
///
/// Trials run in parallel, one engine per worker; the counts do not depend
/// on scheduling. On failure the error of the lowest failing trial index is
/// returned.
pub fn run_trials(experiment: &Experiment, n: u64, master_seed: u64) -> Result<OutcomeHistogram, HarnessError> {
    if n == 0 {
        return Err(HarnessError::InvalidParameter("trial count must be positive".into()));
    }
    experiment.validate()?;
    let labels = experiment.labels();
    let width = labels.len();
    let template = experiment.engine()?;
    let counts = (0..n)
        .into_par_iter()
        .map_init(
            || template.clone(),
            |engine, t| {
                experiment
                    .run_trial(engine, master_seed, t, false)
                    .map(|o| o.bin)
                    .map_err(|e| (t, e))
            },
        )
        .try_fold(
            || vec![0u64; width],
            |mut acc, r| {
                acc[r?] += 1;
                Ok::<_, (u64, PipelineError)>(acc)
            },
        )
        .try_reduce(
            || vec![0u64; width],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        );
    match counts {
        Ok(c) => Ok(OutcomeHistogram::from_counts(labels, c)),
        Err(_) => {
            // parallel short-circuiting may surface any failing trial; rerun
            // sequentially to report the first one
            let mut engine = template;
            for t in 0..n {
                if let Err(source) = experiment.run_trial(&mut engine, master_seed, t, false) {
                    return Err(HarnessError::Trial { trial: t, source });
                }
            }
            unreachable!("a trial failed in parallel but not sequentially")
        }
    }
}

use serde::{Deserialize, Serialize};

use super::{FieldObject, PipelineError, ScreenMapping};
use crate::constants::ParticleType;
use crate::engine::{exit_label, ActionLog, InteractionConfig, InteractionEngine};
use crate::pathspace::{Amplitude, Axis, EntanglementRegistry, ParticleId, PathSampler, PathState};
use crate::trace::{Decision, Draw, TracedRng};

/// Lepton-antilepton interaction with a freshly prepared apparatus particle.
#[derive(Debug, Clone, PartialEq)]
pub struct LeptonStage {
    pub partner: ParticleType,
    pub partner_rows: Vec<(PathState, Amplitude)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stage {
    Field(FieldObject),
    Screen(ScreenMapping),
    Lepton(LeptonStage),
}

impl Stage {
    pub fn kind(&self) -> &'static str {
        match self {
            Stage::Field(_) => "field",
            Stage::Screen(_) => "screen",
            Stage::Lepton(_) => "lepton",
        }
    }
}

/// Scalar read off the final state by the detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observable {
    /// Position component along an axis.
    Position(Axis),
    /// Momentum component along an axis.
    Momentum(Axis),
    /// Cosine between the momentum and an axis.
    Direction(Axis),
}

impl Observable {
    pub fn value(&self, s: &PathState) -> Result<f64, PipelineError> {
        use crate::pathspace::ComponentKind;
        let lacks = |k| PipelineError::Engine(crate::engine::EngineError::StateLacks(k));
        match self {
            Observable::Position(a) => Ok(a.dot(&s.position().ok_or(lacks(ComponentKind::Position))?)),
            Observable::Momentum(a) => Ok(a.dot(&s.momentum().ok_or(lacks(ComponentKind::Momentum))?)),
            Observable::Direction(a) => {
                let p = s.momentum().ok_or(lacks(ComponentKind::Momentum))?;
                let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                if n == 0.0 {
                    return Err(PipelineError::DetectorMiss { value: f64::NAN });
                }
                Ok(a.dot(&p) / n)
            }
        }
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            Observable::Position(_) => "position",
            Observable::Momentum(_) => "momentum",
            Observable::Direction(_) => "direction",
        }
    }

    pub fn axis(&self) -> Axis {
        match *self {
            Observable::Position(a) | Observable::Momentum(a) | Observable::Direction(a) => a,
        }
    }
}

/// Half-open interval `[lo, hi)`; the bin with the largest `hi` also takes `hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorBin {
    pub label: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detector {
    pub observable: Observable,
    pub bins: Vec<DetectorBin>,
}

impl Detector {
    /// Two bins split at zero: `up` for nonnegative values, `down` below.
    pub fn halves(observable: Observable) -> Self {
        Self {
            observable,
            bins: vec![
                DetectorBin {
                    label: "up".into(),
                    lo: 0.0,
                    hi: f64::INFINITY,
                },
                DetectorBin {
                    label: "down".into(),
                    lo: f64::NEG_INFINITY,
                    hi: 0.0,
                },
            ],
        }
    }

    /// `n` equal bins over `[lo, hi]`, labelled by index.
    pub fn uniform(observable: Observable, lo: f64, hi: f64, n: usize) -> Self {
        let w = (hi - lo) / n as f64;
        Self {
            observable,
            bins: (0..n)
                .map(|i| DetectorBin {
                    label: format!("b{i}"),
                    lo: lo + i as f64 * w,
                    hi: if i + 1 == n { hi } else { lo + (i + 1) as f64 * w },
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.bins.is_empty() {
            return Err(PipelineError::InvalidApparatus("detector has no bins".into()));
        }
        for (i, b) in self.bins.iter().enumerate() {
            if !(b.lo < b.hi) || b.lo.is_nan() || b.hi.is_nan() {
                return Err(PipelineError::InvalidApparatus(format!("bin `{}` is empty", b.label)));
            }
            for c in &self.bins[..i] {
                if b.lo < c.hi && c.lo < b.hi {
                    return Err(PipelineError::InvalidApparatus(format!(
                        "bins `{}` and `{}` overlap",
                        c.label, b.label
                    )));
                }
                if b.label == c.label {
                    return Err(PipelineError::InvalidApparatus(format!("duplicate bin `{}`", b.label)));
                }
            }
        }
        Ok(())
    }

    pub fn bin_of(&self, v: f64) -> Option<usize> {
        let top = self.bins.iter().map(|b| b.hi).fold(f64::NEG_INFINITY, f64::max);
        self.bins
            .iter()
            .position(|b| (b.lo <= v && v < b.hi) || (v == top && b.hi == top))
    }

    pub fn labels(&self) -> Vec<String> {
        self.bins.iter().map(|b| b.label.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Apparatus {
    pub stages: Vec<Stage>,
    pub detector: Detector,
    pub config: InteractionConfig,
}

impl Apparatus {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.stages.is_empty() {
            return Err(PipelineError::InvalidApparatus("apparatus needs at least one stage".into()));
        }
        for s in &self.stages {
            if let Stage::Field(f) = s {
                f.validate().map_err(PipelineError::InvalidApparatus)?;
            }
        }
        self.config.validate()?;
        self.detector.validate()
    }

    pub fn engine(&self) -> Result<InteractionEngine, PipelineError> {
        Ok(InteractionEngine::new(self.config.clone())?)
    }
}

/// Definite entry state of the measured particle at one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageOutcome {
    pub stage: usize,
    pub kind: String,
    pub entry: PathState,
    pub exit: String,
}

/// What a measurement delivers: definite values only, plus the draws needed
/// to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub stages: Vec<StageOutcome>,
    pub detector_bin: usize,
    pub detector_label: String,
    pub value: f64,
    pub final_state: PathState,
    pub seed: u64,
    pub trial: u64,
    pub draws: Vec<Draw>,
}

#[derive(Debug, Clone)]
pub struct Measurement {
    pub record: MeasurementRecord,
    /// The measured particle after readout, live in a one-row collection.
    pub particle: ParticleId,
    pub log: Vec<ActionLog>,
}

/// Runs every stage in order, then reads the detector.
///
/// Readout draws one row of the final collection ([`Decision::Readout`]) and
/// collapses it, which also settles any partner the last stage entangled with.
pub fn run_measurement(
    apparatus: &Apparatus,
    engine: &mut InteractionEngine,
    registry: &mut EntanglementRegistry,
    input: ParticleId,
    rng: &mut TracedRng,
) -> Result<Measurement, PipelineError> {
    let start = rng.mark();
    let mut measured = input;
    let mut stages = Vec::with_capacity(apparatus.stages.len());
    let mut log = Vec::new();
    for (i, stage) in apparatus.stages.iter().enumerate() {
        let anti = registry.particle(measured)?.ptype.is_antiparticle();
        let r = match stage {
            Stage::Field(f) => engine.run_field_interaction(registry, measured, f, rng)?,
            Stage::Screen(s) => engine.run_field_interaction(registry, measured, s, rng)?,
            Stage::Lepton(l) => {
                let partner = registry.spawn(l.partner, l.partner_rows.clone())?;
                engine.run_interaction(registry, measured, partner, rng)?
            }
        };
        let keep = r
            .exit_types
            .iter()
            .position(|t| t.is_antiparticle() == anti)
            .unwrap_or(0);
        stages.push(StageOutcome {
            stage: i,
            kind: stage.kind().into(),
            entry: r.entry_states[0].clone(),
            exit: exit_label(&r.exit_types),
        });
        measured = r.exit_particles[keep];
        log.extend(r.log);
    }

    let wave = registry.particle(measured)?;
    let (cid, member) = (wave.collection, wave.member_index);
    let sampler = PathSampler::new(registry.collection(cid)?.table())?;
    let row = sampler.sample(rng, Decision::Readout);
    let collapse = registry.collapse(cid, row)?;
    let final_state = collapse.states[member].clone();
    let value = apparatus.detector.observable.value(&final_state)?;
    let bin = apparatus
        .detector
        .bin_of(value)
        .ok_or(PipelineError::DetectorMiss { value })?;
    Ok(Measurement {
        record: MeasurementRecord {
            stages,
            detector_bin: bin,
            detector_label: apparatus.detector.bins[bin].label.clone(),
            value,
            final_state,
            seed: rng.seed(),
            trial: rng.stream(),
            draws: rng.since(start).to_vec(),
        },
        particle: measured,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{epr_scenario, repeated_field_scenario, spin_input, stern_gerlach_scenario};

    fn measure_once(app: &Apparatus, direction: Axis, seed: u64, trial: u64) -> MeasurementRecord {
        let mut reg = EntanglementRegistry::default();
        let p = reg.spawn(ParticleType::Electron, spin_input(direction, Axis::Z)).unwrap();
        let mut eng = app.engine().unwrap();
        let mut rng = TracedRng::for_trial(seed, trial);
        let m = run_measurement(app, &mut eng, &mut reg, p, &mut rng).unwrap();
        reg.audit().unwrap();
        m.record
    }

    #[test]
    fn eigenstates_hit_their_bin() {
        let app = stern_gerlach_scenario(Axis::Z, 1.0);
        let down = Axis::normalized([0.0, 0.0, -1.0]).unwrap();
        for t in 0..200 {
            assert_eq!(measure_once(&app, Axis::Z, 1, t).detector_label, "up");
            assert_eq!(measure_once(&app, down, 1, t).detector_label, "down");
        }
    }

    #[test]
    fn record_holds_every_draw() {
        let app = stern_gerlach_scenario(Axis::Z, 1.0);
        let r = measure_once(&app, Axis::X, 3, 7);
        let tags: Vec<Decision> = r.draws.iter().map(|d| d.decision).collect();
        use Decision::*;
        assert_eq!(tags, [Position, Path, Channel, Position, Path, Channel, Readout]);
        assert_eq!((r.seed, r.trial), (3, 7));
        assert_eq!(r.stages.len(), 2);
        assert_eq!(r, measure_once(&app, Axis::X, 3, 7));
    }

    #[test]
    fn plus_x_splits_evenly() {
        let app = stern_gerlach_scenario(Axis::Z, 1.0);
        let mut eng = app.engine().unwrap();
        let rows = spin_input(Axis::X, Axis::Z);
        let n = 100_000u64;
        let mut up = 0;
        for t in 0..n {
            let mut reg = EntanglementRegistry::default();
            let p = reg.spawn(ParticleType::Electron, rows.clone()).unwrap();
            let mut rng = TracedRng::for_trial(42, t).without_trace();
            if run_measurement(&app, &mut eng, &mut reg, p, &mut rng).unwrap().record.detector_bin == 0 {
                up += 1;
            }
        }
        let f = up as f64 / n as f64;
        assert!((f - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt(), "{f}");
    }

    #[test]
    fn second_apparatus_repeats_the_bin() {
        let app = stern_gerlach_scenario(Axis::Z, 1.0);
        let mut eng = app.engine().unwrap();
        for t in 0..500 {
            let mut reg = EntanglementRegistry::default();
            let p = reg.spawn(ParticleType::Electron, spin_input(Axis::X, Axis::Z)).unwrap();
            let mut rng = TracedRng::for_trial(9, t);
            let first = run_measurement(&app, &mut eng, &mut reg, p, &mut rng).unwrap();
            let second = run_measurement(&app, &mut eng, &mut reg, first.particle, &mut rng).unwrap();
            assert_eq!(first.record.detector_bin, second.record.detector_bin);
        }
    }

    #[test]
    fn input_collection_dies_at_stage_one() {
        let app = stern_gerlach_scenario(Axis::Z, 1.0);
        let mut eng = app.engine().unwrap();
        let mut reg = EntanglementRegistry::default();
        let p = reg.spawn(ParticleType::Electron, spin_input(Axis::X, Axis::Z)).unwrap();
        let cid = reg.particle(p).unwrap().collection;
        let mut rng = TracedRng::from_seed(0);
        let r = eng
            .run_field_interaction(&mut reg, p, match &app.stages[0] {
                Stage::Field(f) => f,
                _ => unreachable!(),
            }, &mut rng)
            .unwrap();
        assert!(!reg.is_live(cid));
        assert!(r.collapsed_ids.contains(&cid));
    }

    #[test]
    fn epr_partner_follows_the_collapsed_row() {
        let setup = epr_scenario(Axis::Z, Axis::Z, 1.0);
        let mut eng = setup.apparatus_a.engine().unwrap();
        for t in 0..500 {
            let mut reg = EntanglementRegistry::default();
            let (_, a, b) = setup.spawn(&mut reg).unwrap();
            let mut rng = TracedRng::for_trial(5, t);
            let ma = run_measurement(&setup.apparatus_a, &mut eng, &mut reg, a, &mut rng).unwrap();
            assert_eq!(reg.max_members(), 1);
            let b_state = &reg.collection_of(b).unwrap().table().rows()[0].states[0];
            let b_up = b_state.spin().unwrap().is_up();
            let mb = run_measurement(&setup.apparatus_b, &mut eng, &mut reg, b, &mut rng).unwrap();
            assert_ne!(ma.record.detector_bin, mb.record.detector_bin);
            assert_eq!(mb.record.detector_label == "up", b_up);
        }
    }

    #[test]
    fn misaligned_epr_basis_is_refused() {
        let setup = epr_scenario(Axis::Z, Axis::X, 1.0);
        let mut eng = setup.apparatus_a.engine().unwrap();
        let mut reg = EntanglementRegistry::default();
        let (_, a, b) = setup.spawn(&mut reg).unwrap();
        let mut rng = TracedRng::from_seed(0);
        run_measurement(&setup.apparatus_a, &mut eng, &mut reg, a, &mut rng).unwrap();
        assert!(matches!(
            run_measurement(&setup.apparatus_b, &mut eng, &mut reg, b, &mut rng),
            Err(PipelineError::Engine(crate::engine::EngineError::UnsupportedBasis { .. }))
        ));
    }

    #[test]
    fn repeated_fields_draw_once_per_stage() {
        let app = repeated_field_scenario(Axis::Z, 1.0, 0.8, 4);
        let r = measure_once(&app, Axis::Z, 1, 0);
        assert_eq!(r.draws.len(), 4 * 3 + 1);
        assert_eq!(r.stages.len(), 4);
    }

    #[test]
    fn detector_checks() {
        let d = Detector::uniform(Observable::Direction(Axis::Z), -1.0, 1.0, 4);
        d.validate().unwrap();
        assert_eq!(d.bin_of(1.0), Some(3));
        assert_eq!(d.bin_of(-1.0), Some(0));
        assert_eq!(d.bin_of(1.5), None);
        let mut bad = d.clone();
        bad.bins[1].lo = -0.9;
        assert!(bad.validate().is_err());
        let h = Detector::halves(Observable::Position(Axis::Z));
        assert_eq!(h.bin_of(0.0), Some(0));
        assert_eq!(h.bin_of(-1e-300), Some(1));
    }

    #[test]
    fn detector_miss() {
        let mut app = stern_gerlach_scenario(Axis::Z, 1.0);
        app.detector = Detector::uniform(Observable::Position(Axis::Z), 5.0, 6.0, 1);
        let mut reg = EntanglementRegistry::default();
        let p = reg.spawn(ParticleType::Electron, spin_input(Axis::Z, Axis::Z)).unwrap();
        let mut eng = app.engine().unwrap();
        let mut rng = TracedRng::from_seed(0);
        assert_eq!(
            run_measurement(&app, &mut eng, &mut reg, p, &mut rng).unwrap_err(),
            PipelineError::DetectorMiss { value: 1.0 }
        );
    }

    #[test]
    fn lepton_stage_pipeline() {
        let setup = crate::pipeline::beam_scenario(
            ParticleType::Electron,
            20.0,
            ParticleType::Positron,
            20.0,
            InteractionConfig::default(),
            8,
        );
        let mut eng = setup.apparatus.engine().unwrap();
        let mut reg = EntanglementRegistry::default();
        let p = reg.spawn(setup.projectile, setup.input_rows.clone()).unwrap();
        let mut rng = TracedRng::for_trial(2, 0);
        let m = run_measurement(&setup.apparatus, &mut eng, &mut reg, p, &mut rng).unwrap();
        reg.audit().unwrap();
        assert_eq!(reg.max_members(), 1);
        assert_eq!(m.record.stages[0].exit, "electron/positron");
        assert_eq!(m.record.draws.len(), 4);
    }
}

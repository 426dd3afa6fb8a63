use super::{
    singlet_rows, spin_direction_rows, Apparatus, Detector, FieldObject, LeptonStage, Observable, PipelineError,
    ScreenMapping, Stage,
};
use crate::constants::ParticleType;
use crate::engine::InteractionConfig;
use crate::pathspace::{
    Amplitude, Axis, CollectionId, EntanglementRegistry, ParticleId, PathRow, PathState, Spin, StateComponent,
};

/// Screen distance used by the built-in apparatus, natural length units.
pub const SCREEN_DISTANCE: f64 = 1.0;

fn at_rest(position: [f64; 3]) -> PathState {
    PathState::new(vec![
        StateComponent::Position(position),
        StateComponent::Momentum([0.0; 3]),
    ])
    .expect("distinct kinds")
}

/// Field stage followed by a screen, read out in two halves along `axis`.
pub fn stern_gerlach_scenario(axis: Axis, strength: f64) -> Apparatus {
    Apparatus {
        stages: vec![
            Stage::Field(FieldObject::sharp(axis, strength)),
            Stage::Screen(ScreenMapping {
                axis,
                distance: SCREEN_DISTANCE,
            }),
        ],
        detector: Detector::halves(Observable::Position(axis)),
        config: InteractionConfig::default(),
    }
}

/// Input rows for a spin-1/2 particle at rest at the origin, spin pointing
/// along `direction`, written in the eigenbasis of `axis`.
pub fn spin_input(direction: Axis, axis: Axis) -> Vec<(PathState, Amplitude)> {
    spin_direction_rows(direction, axis, &at_rest([0.0; 3]))
}

/// `k` soft fields along `axis` read out by the sign of the accumulated
/// momentum. The first field pushes 1.5 times as hard, so an even split of
/// the later votes is decided by the first one.
pub fn repeated_field_scenario(axis: Axis, strength: f64, sharpness: f64, k: usize) -> Apparatus {
    let stages = (0..k)
        .map(|i| {
            let mut f = FieldObject::soft(axis, strength, sharpness);
            if i == 0 {
                f.weight = 1.5;
            }
            Stage::Field(f)
        })
        .collect();
    Apparatus {
        stages,
        detector: Detector::halves(Observable::Momentum(axis)),
        config: InteractionConfig::default(),
    }
}

/// Two particles sharing an anticorrelated spin table, each with its own
/// Stern-Gerlach apparatus.
#[derive(Debug, Clone, PartialEq)]
pub struct EprSetup {
    pub ptypes: [ParticleType; 2],
    pub rows: Vec<PathRow>,
    pub apparatus_a: Apparatus,
    pub apparatus_b: Apparatus,
}

impl EprSetup {
    pub fn spawn(&self, registry: &mut EntanglementRegistry) -> Result<(CollectionId, ParticleId, ParticleId), PipelineError> {
        let (cid, ids) = registry.spawn_entangled(&self.ptypes, self.rows.clone())?;
        Ok((cid, ids[0], ids[1]))
    }
}

/// Singlet-like table along `axis_a`, A at `x = -1`, B at `x = +1`.
///
/// B's apparatus measures along `axis_b`; unless it equals `axis_a`, B's
/// measurement fails with an unsupported-basis error.
pub fn epr_scenario(axis_a: Axis, axis_b: Axis, strength: f64) -> EprSetup {
    let rows = singlet_rows(axis_a, &at_rest([-1.0, 0.0, 0.0]), &at_rest([1.0, 0.0, 0.0]));
    EprSetup {
        ptypes: [ParticleType::Electron, ParticleType::Positron],
        rows,
        apparatus_a: stern_gerlach_scenario(axis_a, strength),
        apparatus_b: stern_gerlach_scenario(axis_b, strength),
    }
}

/// Head-on lepton beams along `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamSetup {
    pub projectile: ParticleType,
    pub input_rows: Vec<(PathState, Amplitude)>,
    pub apparatus: Apparatus,
}

fn unpolarized(momentum: [f64; 3]) -> Vec<(PathState, Amplitude)> {
    let base = PathState::new(vec![
        StateComponent::Position([0.0; 3]),
        StateComponent::Momentum(momentum),
    ])
    .expect("distinct kinds");
    let a = Amplitude::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [Spin::up(Axis::Z), Spin::down(Axis::Z)]
        .into_iter()
        .map(|s| (base.clone().with(StateComponent::Spin(s)), a))
        .collect()
}

/// An unpolarized `projectile` with momentum `p_projectile` along `+z` meets
/// an unpolarized `target` with momentum `p_target` along `-z`; the detector
/// bins the direction cosine of the outgoing projectile-like lepton.
pub fn beam_scenario(
    projectile: ParticleType,
    p_projectile: f64,
    target: ParticleType,
    p_target: f64,
    config: InteractionConfig,
    detector_bins: usize,
) -> BeamSetup {
    BeamSetup {
        projectile,
        input_rows: unpolarized([0.0, 0.0, p_projectile]),
        apparatus: Apparatus {
            stages: vec![Stage::Lepton(LeptonStage {
                partner: target,
                partner_rows: unpolarized([0.0, 0.0, -p_target]),
            })],
            detector: Detector::uniform(Observable::Direction(Axis::Z), -1.0, 1.0, detector_bins),
            config,
        },
    }
}

//! Measurements as chains of interactions.
//!
//! An [`Apparatus`] runs its stages one after another on the measured
//! particle and finally reads a detector bin off the surviving state. Field
//! and screen stages use declared amplitude maps; lepton stages run a full
//! lepton-antilepton interaction against a prepared apparatus particle.

mod apparatus;
mod field;
mod scenarios;

pub use apparatus::{
    run_measurement, Apparatus, Detector, DetectorBin, LeptonStage, Measurement, MeasurementRecord, Observable,
    Stage, StageOutcome,
};
pub use field::{singlet_rows, spin_direction_rows, FieldKind, FieldObject, ScreenMapping};
pub use scenarios::{
    beam_scenario, epr_scenario, repeated_field_scenario, spin_input, stern_gerlach_scenario, BeamSetup, EprSetup,
    SCREEN_DISTANCE,
};

use crate::engine::EngineError;
use crate::pathspace::PathspaceError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("detector reading {value} falls outside every bin")]
    DetectorMiss { value: f64 },
    #[error("invalid apparatus: {0}")]
    InvalidApparatus(String),
}

impl From<PathspaceError> for PipelineError {
    fn from(e: PathspaceError) -> Self {
        PipelineError::Engine(EngineError::Pathspace(e))
    }
}

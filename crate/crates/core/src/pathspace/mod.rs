//! Paths, path tables and the entanglement registry.
//!
//! A particle/wave owns a reference to one [`PwCollection`]: a table whose
//! rows assign a definite state to every member particle plus one complex
//! amplitude. Superposition is several rows; entanglement is several members.

mod registry;
mod state;
mod table;

pub use registry::{
    AuditError, Collapse, CollectionId, EntanglementRegistry, ParticleId, ParticleWave,
    PwCollection,
};
pub use state::{Axis, ComponentKind, PathState, Spin, StateComponent};
pub use table::{
    born_probabilities, marginal_probabilities, select_path, Amplitude, PathRow, PathSampler,
    PathTable,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PathspaceError {
    #[error("all row amplitudes are zero")]
    AllAmplitudesZero,
    #[error("path table has no rows")]
    EmptyTable,
    #[error("row {row} has {found} member states, expected {expected}")]
    ShapeMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row} has a non-finite amplitude")]
    NonFiniteAmplitude { row: usize },
    #[error("sampling weights must be finite and nonnegative")]
    InvalidWeight,
    #[error("state component is not finite")]
    NonFiniteState,
    #[error("path state lists {0} twice")]
    DuplicateComponent(ComponentKind),
    #[error("no path state carries a {0} component")]
    UnknownComponentKind(ComponentKind),
    #[error("member {member} out of range for a {width}-member table")]
    MemberOutOfRange { member: usize, width: usize },
    #[error("row {row} out of range for a {rows}-row table")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("{0} is not live")]
    StaleCollection(CollectionId),
    #[error("{0} is not registered")]
    UnknownParticle(ParticleId),
    #[error("{0} already shares a collection")]
    MemberAlreadyEntangled(ParticleId),
    #[error("{0} listed twice")]
    DuplicateMember(ParticleId),
    #[error("axis {0:?} is not a unit vector")]
    NotUnitAxis([f64; 3]),
    #[error("spin label 2m = {0} is not supported")]
    InvalidSpin(i8),
}

//! The six-action interaction process.
//!
//! An interaction runs, in order: fluctuation position, path reduction,
//! channel determination, probabilistic projection, registration of the exit
//! collection, and collapse of the entry collections. Position, path and
//! channel each consume exactly one draw; nothing else is random.

mod fluctuation;
mod interaction;
mod projection;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use fluctuation::{
    conditioned_weights, positional_support, sample_fluctuation_position, select_partner,
};
pub use interaction::{InteractionEngine, InteractionResult};
pub use projection::{probabilistic_projection, AmplitudeMap, EntryLine, ExitGrid};

use crate::constants::{ForceTag, ParticleType};
use crate::pathspace::{ComponentKind, ParticleId, PathspaceError};
use crate::qft::{Channel, ChannelQuadrature, Couplings, QftError};
use crate::trace::Draw;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Pathspace(#[from] PathspaceError),
    #[error(transparent)]
    Qft(#[from] QftError),
    #[error("no participant has positional support")]
    EmptySupport,
    #[error("{0} has no amplitude at the fluctuation position")]
    IsolatedFluctuation(ParticleId),
    #[error("conservation excludes every exit state")]
    NoOpenExitStates,
    #[error("{particle} does not couple through {force:?}")]
    ForceMismatch { particle: ParticleId, force: ForceTag },
    #[error("{particle} path state has no {kind} component")]
    MissingComponent { particle: ParticleId, kind: ComponentKind },
    #[error("entry state has no {0} component")]
    StateLacks(ComponentKind),
    #[error("a particle cannot interact with itself")]
    SelfInteraction,
    #[error("spin along {found} cannot be measured by a field along {field}")]
    UnsupportedBasis { found: String, field: String },
    #[error("invalid interaction config: {0}")]
    InvalidConfig(String),
}

/// How the exit particle types are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelPolicy {
    /// Draw from [`crate::qft::channel_weights`] at the selected entry energy.
    Dynamic,
    /// Always use this channel. The channel draw is still consumed so that
    /// every interaction has the same decision sequence.
    Fixed(Channel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionConfig {
    pub grid: ExitGrid,
    pub couplings: Couplings,
    pub quadrature: ChannelQuadrature,
    pub channel_policy: ChannelPolicy,
    /// Relative per-component four-momentum tolerance for exit rows.
    pub tolerance: f64,
}

impl Default for InteractionConfig {
    fn default() -> Self {
        Self {
            grid: ExitGrid::default(),
            couplings: Couplings::default(),
            quadrature: ChannelQuadrature::default(),
            channel_policy: ChannelPolicy::Dynamic,
            tolerance: 1e-6,
        }
    }
}

impl InteractionConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        self.grid.validate()?;
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(EngineError::InvalidConfig("tolerance must be positive".into()));
        }
        let c = self.quadrature.forward_cutoff;
        if !(c > 0.0 && c < 1.0) || self.quadrature.nodes < 2 {
            return Err(EngineError::InvalidConfig(
                "quadrature needs >= 2 nodes and a cutoff in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// A randomly positioned, force-typed event shared by its participants.
#[derive(Debug, Clone, PartialEq)]
pub struct PwFluctuation {
    pub position: [f64; 3],
    pub force: ForceTag,
    pub participants: Vec<ParticleId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Position,
    Path,
    Channel,
    Projection,
    Entanglement,
    Collapse,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Action::Position => "position",
            Action::Path => "path",
            Action::Channel => "channel",
            Action::Projection => "projection",
            Action::Entanglement => "entanglement",
            Action::Collapse => "collapse",
        };
        f.write_str(s)
    }
}

/// One line of the interaction log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionLog {
    pub action: Action,
    pub draws: Vec<Draw>,
    pub detail: String,
}

impl fmt::Display for ActionLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}", self.action, self.detail)?;
        for d in &self.draws {
            write!(f, "\t{}={:.17}", d.decision, d.value)?;
        }
        Ok(())
    }
}

/// Exit particle types of an interaction, for logs and reports.
pub fn exit_label(types: &[ParticleType]) -> String {
    types.iter().map(|t| t.name()).collect::<Vec<_>>().join("/")
}

//! Relativistic kinematics, Dirac spinors and tree-level lepton-pair amplitudes.
//!
//! Natural units, energies in MeV, Dirac representation, `u-bar u = 2m`.

mod amplitude;
mod channels;
mod gamma;
mod kinematics;
pub mod quadrature;
mod spinor;

pub use amplitude::{
    amplitude_from_spinors, bhabha_amplitude, mandelstam_st, spin_averaged_sqr, Couplings, Diagrams,
    ExternalSpinors, LeptonState, PairState,
};
pub use channels::{candidate_channels, channel_weights, Channel, ChannelQuadrature};
pub use gamma::{GammaBasis, Mat4, METRIC};
pub use kinematics::{conserves, direction, two_body_final_state, two_body_momentum, FourMomentum};
pub(crate) use spinor::pauli_eigenvectors;
pub use spinor::{dirac_adjoint, dirac_residual, spinor_u, spinor_v, DiracSpinor, Row4, SpinLabel};

use crate::constants::ParticleType;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QftError {
    #[error("momentum (E = {e}, |p| = {p}) is not on shell for mass {mass}")]
    OffShell { e: f64, p: f64, mass: f64 },
    #[error("{0}-channel propagator pole: perturb the kinematics")]
    PropagatorPole(&'static str),
    #[error("sqrt(s) = {sqrt_s} MeV is below the entry pair threshold")]
    BelowThreshold { sqrt_s: f64 },
    #[error("no exit channel carries weight at sqrt(s) = {sqrt_s} MeV")]
    NoOpenChannel { sqrt_s: f64 },
    #[error("spin label 2m = {0} is not spin-1/2")]
    NotSpinHalf(i8),
    #[error("({0}, {1}) is not a lepton-antilepton pair")]
    NotALeptonPair(ParticleType, ParticleType),
    #[error("no single-photon diagram produces {0} {1}")]
    ForbiddenChannel(ParticleType, ParticleType),
}

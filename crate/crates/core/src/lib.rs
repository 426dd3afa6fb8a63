//! Stochastic simulation of interaction-driven wave-function collapse.
//!
//! Particles carry finite path tables ([`pathspace`]); interactions between
//! them draw a fluctuation position, reduce the entry paths, pick an exit
//! channel and project onto exit paths weighted by tree-level QED amplitudes
//! ([`qft`], [`engine`]). Measurements chain such interactions ([`pipeline`]),
//! ensembles of them are tested statistically ([`harness`]), and scenario
//! files drive it all from the command line ([`scenario`], [`cli`]).
//!
//! Every random choice is one tagged uniform draw from a seeded stream
//! ([`trace`]), so any run can be replayed exactly.

pub mod cli;
pub mod constants;
pub mod pathspace;
pub mod qft;
pub mod scenario;
pub mod engine;
pub mod harness;
pub mod pipeline;
pub mod trace;

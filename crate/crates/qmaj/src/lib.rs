//! Numerical workbench for phase-insensitive bosonic Gaussian channels on
//! truncated Fock spaces.
//!
//! The crate provides, as pure functions over immutable values:
//!
//! - [`fock`]: Fock-basis states, probability vectors with tracked tail mass,
//!   bipartite amplitude matrices, density matrices, Schmidt spectra, and
//!   von Neumann entropy;
//! - [`squeezer`]: exact and infinitesimal two-mode-squeezer outputs and
//!   their entanglement;
//! - [`majorization`]: the majorization partial order, the lower-triangular
//!   transfer (column-stochastic) matrix families that witness it, and
//!   integer-argument incomplete beta functions;
//! - [`channel`]: attenuator/amplifier decomposition of a phase-insensitive
//!   channel, its action on Gaussian moments, and full Kraus-level
//!   simulation on density matrices;
//! - [`locc`]: local measurement protocols that deterministically convert
//!   between squeezer output states;
//! - [`explore`]: entanglement tables, randomized majorization scans,
//!   entanglement-crossing location, and multi-start output-entropy
//!   minimization.
//!
//! Truncation is explicit everywhere: probability vectors carry their
//! analytic tail mass, transfer matrices carry per-column tail deficits, and
//! operations that could silently lose mass take an `eps` budget and fail
//! loudly when it cannot be met.

pub mod channel;
pub mod explore;
pub mod fock;
pub mod locc;
pub mod majorization;
pub mod numeric;
pub mod squeezer;

use thiserror::Error;

/// Complex scalar used throughout (re-exported from nalgebra's num-complex).
pub type C64 = nalgebra::Complex<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot normalize an all-zero amplitude sequence")]
    DegenerateState,

    #[error("state invalid: {reason} (norm deviation {deviation:.3e})")]
    InvalidState { reason: &'static str, deviation: f64 },

    #[error("distribution entry {value:.3e} at index {index} is negative beyond tolerance")]
    InvalidDistribution { index: usize, value: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("channel is not completely positive: noise falls short of |tau - 1| by {deficit:.3e}")]
    NotCompletelyPositive { deficit: f64 },

    #[error("truncation at dimension {dim} exceeds the mass budget eps = {eps:.3e}; at least {required} needed")]
    Truncation { dim: usize, required: usize, eps: f64 },

    #[error("majorization comparison inconclusive: tail mass {tail:.3e} is not below eta = {eta:.3e}")]
    InconclusiveTruncation { tail: f64, eta: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("protocol inconsistent: {0}")]
    ProtocolInconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

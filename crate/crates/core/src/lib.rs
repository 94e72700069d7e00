//! Numerical toolkit for macroscopic optomechanical entanglement created from
//! displaced single-photon entanglement.
//!
//! The crate is layered bottom-up:
//!
//! * [`qcore`]: amplitudes, coherent-state algebra, small density matrices,
//!   negativity and adaptive quadrature.
//! * [`protocol`]: device parameters, the optical input state and the
//!   impulsive optomechanical kick, giving the exact hybrid state.
//! * [`measurement`]: homodyne/position correlations, the position
//!   projection with feedback, and the interference visibility pipeline.
//! * [`decoherence`]: localization kernels, pointer distributions and the
//!   equivalent phase-noise channel on the optical mode.
//! * [`witness`]: the AB|M separability bound and verdict.
//! * [`feasibility`]: device-design arithmetic and decoherence testability.
//! * [`oracle`]: brute-force truncated-Fock simulations used to
//!   cross-check every closed form above.

pub mod constants;
pub mod decoherence;
pub mod feasibility;
pub mod measurement;
pub mod oracle;
pub mod protocol;
pub mod qcore;
pub mod witness;

pub use num_complex::Complex64 as C64;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("Fock truncation at kmax={kmax} keeps norm {achieved_norm:.3e} (need >= {required:.3e})")]
    Truncation {
        kmax: usize,
        achieved_norm: f64,
        required: f64,
    },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("quadrature did not converge (estimated residual {residual:.3e} after {intervals} subintervals)")]
    Quadrature { residual: f64, intervals: usize },
    #[error("measurement at t={time:.6e} s is not a multiple of half a mechanical period")]
    NotHalfPeriod { time: f64 },
    #[error("state at t={time:.6e} s is not at a quarter mechanical period")]
    NotQuarterPeriod { time: f64 },
    #[error("inconsistent parameters: {0}")]
    Inconsistent(String),
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

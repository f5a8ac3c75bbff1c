//! Quantum evolution under a stochastic time increment.
//!
//! Each clock step advances time by δt = μ(k) + δt^Q with a Gaussian
//! fluctuation δt^Q of width σ. Accumulated time splits into the expectation
//! ⟨t⟩ = Σμ and a zero-mean fluctuation part. Averaging the unitary evolution
//! over δt dephases energy-basis coherences; the step at which they fall
//! below a threshold is the superposition retention time that labels a
//! quantum class.

mod class;
mod evolve;
mod model;
mod reparam;

use thiserror::Error;

pub use class::{
    classify, rescale_class, retention_time, QuantumClassRecord, Retention, CLASS_TOLERANCE,
    DEFAULT_THRESHOLD,
};
pub use evolve::{evolve_analytic, evolve_monte_carlo, CoherenceTrajectory, NonUnitaryEvent};
pub use model::{
    sample_increments, ClockModel, IncrementSample, MeanSchedule, QuantumSystem, TimeDecomposition,
};
pub use reparam::{reparametrize_events, Reparametrization};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClockError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("mean increment at step {step} is {value}; it must be positive")]
    NonPositiveMean { step: usize, value: f64 },
    #[error("invalid initial density: {0}")]
    InvalidDensity(String),
    #[error("trajectory has no initial coherence")]
    NoCoherence,
    #[error("reparametrization {0} is not strictly increasing on the trajectory")]
    NonMonotonic(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

//! Neural-glial network: neuron states φ (n sites × N temporal steps), glial
//! connections G ∈ o(N) acting on the temporal index, the covariant difference
//! and its O(N) gauge symmetry, the Eguchi–Kawai single-site reduction, and
//! the quenched Hopfield description with Hebbian couplings.

mod ek;
mod entropy;
mod field;
mod hopfield;
mod observer;

use thiserror::Error;

use crate::numerics::NumericsError;

pub use ek::{ek_comparison, ek_reduced_hamiltonian, EkDraw, EkSummary, EK_SIZES};
pub use entropy::{entropy_rate, EntropyEstimate, MIN_COUNTS_PER_BIN};
pub use field::{
    assemble_delta, covariant_difference, exp_delta, gauge_transform, hamiltonian_full,
    GaugeTransformation, GlialField, NeuralState, MAX_FULL_DIMENSION,
};
pub use hopfield::{
    glauber_history, hamiltonian_quenched, hebbian_couplings, rolldown, spike_pattern, QuenchedCouplings,
    RolldownTrajectory,
};
pub use observer::{observer_triple, ObserverTriple};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GlianetError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("glial matrix at site {site} is not antisymmetric (defect {defect:e})")]
    NotAntisymmetric { site: usize, defect: f64 },
    #[error("gauge matrix at site {site} is not orthogonal (defect {defect:e})")]
    NotOrthogonal { site: usize, defect: f64 },
    #[error("coupling matrix is not symmetric")]
    NotSymmetric,
    #[error("assembled operator dimension {0} exceeds the limit {MAX_FULL_DIMENSION}")]
    TooLarge(usize),
    #[error("state entry {0} is not ±1")]
    NotSpinState(i8),
    #[error("rolldown did not reach a fixed point within {sweeps} sweeps")]
    NotConverged { sweeps: usize, last_state: Vec<i8> },
    #[error("missing observer component: {0}")]
    MissingComponent(String),
    #[error("cannot parse observer record: {0}")]
    Parse(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

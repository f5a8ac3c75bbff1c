//! Semiclassical mini-superspace: the Wheeler–De Witt constraint
//! (−ħ²∂ₐ² − U(a) + ℋ_q)Ψ = 0 with the WKB ansatz Ψ = A e^{iS/ħ} χ.
//!
//! Order ħ⁰ gives the Hamilton–Jacobi equation S′² = U, order ħ¹ the amplitude
//! transport AS″ + 2A′S′ = 0 and 2iħS′χ′ = ℋ_qχ. Reading the growing scale
//! factor as a clock, da/dt = 2N·S′, turns the last equation into the matter
//! Schrödinger equation iħ∂ₜχ = Nℋ_qχ.

mod clock;
mod residual;
mod semiclassical;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::NumericsError;

pub use clock::{clock_map, evolve_matter, ClockTrajectory, MatterTrajectory};
pub use residual::{wdw_residual, WdwReport, WdwResidual, COARSE_GRID_DISAGREEMENT};
pub use semiclassical::{
    amplitude_transport, hamilton_jacobi_defect, hamilton_jacobi_phase, phase_between,
    transport_residual, PhaseProfile,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MiniSuperspaceError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Euclidean region: U({a}) = {value} < 0")]
    EuclideanRegion { a: f64, value: f64 },
    #[error("caustic: dS/da vanishes at a = {0}")]
    Caustic(f64),
    #[error("lapse N({t}) = {value} is not positive")]
    NonPositiveLapse { t: f64, value: f64 },
    #[error("matter Hamiltonian at a = {a} is not Hermitian (defect {defect:e})")]
    NotHermitian { a: f64, defect: f64 },
    #[error("initial matter state has norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("matter step rejected: norm drift {0:e} exceeds 1e-12")]
    NormDrift(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type MatrixFn = Arc<dyn Fn(f64) -> DMatrix<Complex64> + Send + Sync>;

/// How the matter Hamiltonian depends on ħ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatterScaling {
    /// ℋ_q(a) as supplied.
    Fixed,
    /// ħ·h(a): matter energies of order ħ, the regime in which the order-ħ
    /// truncation is controlled.
    ProportionalToHbar,
}

#[derive(Clone)]
pub struct MiniSuperspaceModel {
    potential: RealFn,
    hbar: f64,
    lapse: RealFn,
    matter_dimension: usize,
    matter: MatrixFn,
    scaling: MatterScaling,
}

impl fmt::Debug for MiniSuperspaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MiniSuperspaceModel")
            .field("hbar", &self.hbar)
            .field("matter_dimension", &self.matter_dimension)
            .field("scaling", &self.scaling)
            .finish_non_exhaustive()
    }
}

impl MiniSuperspaceModel {
    /// Unit lapse and no matter (one-dimensional χ with ℋ_q = 0).
    pub fn new<U>(potential: U, hbar: f64) -> Result<Self, MiniSuperspaceError>
    where
        U: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(MiniSuperspaceError::InvalidParameter(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        Ok(Self {
            potential: Arc::new(potential),
            hbar,
            lapse: Arc::new(|_| 1.0),
            matter_dimension: 1,
            matter: Arc::new(|_| DMatrix::zeros(1, 1)),
            scaling: MatterScaling::Fixed,
        })
    }

    pub fn with_lapse<N>(mut self, lapse: N) -> Self
    where
        N: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.lapse = Arc::new(lapse);
        self
    }

    pub fn with_matter<H>(mut self, dimension: usize, hamiltonian: H, scaling: MatterScaling) -> Self
    where
        H: Fn(f64) -> DMatrix<Complex64> + Send + Sync + 'static,
    {
        self.matter_dimension = dimension;
        self.matter = Arc::new(hamiltonian);
        self.scaling = scaling;
        self
    }

    pub fn with_hbar(mut self, hbar: f64) -> Result<Self, MiniSuperspaceError> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(MiniSuperspaceError::InvalidParameter(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        self.hbar = hbar;
        Ok(self)
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn potential(&self, a: f64) -> f64 {
        (self.potential)(a)
    }

    pub fn lapse(&self, t: f64) -> f64 {
        (self.lapse)(t)
    }

    pub fn matter_dimension(&self) -> usize {
        self.matter_dimension
    }

    pub fn scaling(&self) -> MatterScaling {
        self.scaling
    }

    /// dS/da = +√U on the expanding branch.
    pub fn phase_gradient(&self, a: f64) -> Result<f64, MiniSuperspaceError> {
        let u = self.potential(a);
        if !(u >= 0.0) {
            return Err(MiniSuperspaceError::EuclideanRegion { a, value: u });
        }
        Ok(u.sqrt())
    }

    /// Effective ℋ_q(a), including the ħ factor under `ProportionalToHbar`.
    pub fn matter_hamiltonian(&self, a: f64) -> Result<DMatrix<Complex64>, MiniSuperspaceError> {
        let h = (self.matter)(a);
        let d = self.matter_dimension;
        if h.nrows() != d || h.ncols() != d {
            return Err(MiniSuperspaceError::InvalidParameter(format!(
                "matter Hamiltonian is {}x{}, expected {d}x{d}",
                h.nrows(),
                h.ncols()
            )));
        }
        let max_abs = |m: &DMatrix<Complex64>| m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let defect = max_abs(&(&h - h.adjoint()));
        if defect > 1e-12 * max_abs(&h).max(1.0) {
            return Err(MiniSuperspaceError::NotHermitian { a, defect });
        }
        Ok(match self.scaling {
            MatterScaling::Fixed => h,
            MatterScaling::ProportionalToHbar => h * Complex64::new(self.hbar, 0.0),
        })
    }

    /// Rejects Euclidean points and non-Hermitian matter on a uniform sample.
    pub fn check_range(&self, a_lo: f64, a_hi: f64, samples: usize) -> Result<(), MiniSuperspaceError> {
        if !(a_lo < a_hi && a_lo.is_finite() && a_hi.is_finite()) {
            return Err(MiniSuperspaceError::InvalidParameter(format!(
                "invalid scale-factor range [{a_lo}, {a_hi}]"
            )));
        }
        for a in crate::numerics::linspace(a_lo, a_hi, samples.max(2)) {
            self.phase_gradient(a)?;
            self.matter_hamiltonian(a)?;
        }
        Ok(())
    }
}

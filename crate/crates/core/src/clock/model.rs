use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::ClockError;
use crate::numerics::rng;

/// Schedule of mean time increments μ(k), indexed from step 1.
#[derive(Clone)]
pub enum MeanSchedule {
    /// Broken time-reparametrization symmetry: μ(k) ≡ μ₀.
    Constant(f64),
    /// Unbroken symmetry: μ(k) is an arbitrary positive function of the step.
    Varying(Arc<dyn Fn(usize) -> f64 + Send + Sync>),
}

impl fmt::Debug for MeanSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeanSchedule::Constant(mu0) => write!(f, "Constant({mu0})"),
            MeanSchedule::Varying(_) => write!(f, "Varying(<fn>)"),
        }
    }
}

/// Stochastic clock: δt_k = μ(k) + δt^Q_k with δt^Q_k ~ N(0, σ²).
#[derive(Clone, Debug)]
pub struct ClockModel {
    schedule: MeanSchedule,
    /// Multiplier applied to a varying schedule (rescaling divides it).
    time_scale: f64,
    sigma: f64,
}

impl ClockModel {
    /// Broken-symmetry clock with constant mean increment `mu0`.
    pub fn broken(mu0: f64, sigma: f64) -> Result<Self, ClockError> {
        if !(mu0 > 0.0 && mu0.is_finite()) {
            return Err(ClockError::InvalidParameter(format!(
                "mean increment must be positive, got {mu0}"
            )));
        }
        Self::check_sigma(sigma)?;
        Ok(Self {
            schedule: MeanSchedule::Constant(mu0),
            time_scale: 1.0,
            sigma,
        })
    }

    /// Unbroken-symmetry clock following an arbitrary positive schedule.
    /// Positivity is checked lazily, step by step, when the clock is used.
    pub fn unbroken<F>(schedule: F, sigma: f64) -> Result<Self, ClockError>
    where
        F: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        Self::check_sigma(sigma)?;
        Ok(Self {
            schedule: MeanSchedule::Varying(Arc::new(schedule)),
            time_scale: 1.0,
            sigma,
        })
    }

    fn check_sigma(sigma: f64) -> Result<(), ClockError> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(ClockError::InvalidParameter(format!(
                "fluctuation width must be finite and non-negative, got {sigma}"
            )));
        }
        Ok(())
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn symmetry_broken(&self) -> bool {
        matches!(self.schedule, MeanSchedule::Constant(_))
    }

    /// μ₀ for a broken-symmetry clock.
    pub fn mu0(&self) -> Option<f64> {
        match self.schedule {
            MeanSchedule::Constant(mu0) => Some(mu0),
            MeanSchedule::Varying(_) => None,
        }
    }

    /// μ(k) for step `k ≥ 1`, rejecting non-positive values.
    pub fn mean_increment(&self, step: usize) -> Result<f64, ClockError> {
        let mu = match &self.schedule {
            MeanSchedule::Constant(mu0) => *mu0,
            MeanSchedule::Varying(f) => self.time_scale * f(step),
        };
        if mu > 0.0 && mu.is_finite() {
            Ok(mu)
        } else {
            Err(ClockError::NonPositiveMean { step, value: mu })
        }
    }

    /// Expectation time ⟨t⟩ after `step` increments.
    pub(crate) fn expected_time(&self, step: usize, previous: f64) -> Result<f64, ClockError> {
        match self.schedule {
            MeanSchedule::Constant(mu0) => Ok(step as f64 * mu0),
            MeanSchedule::Varying(_) => Ok(previous + self.mean_increment(step)?),
        }
    }

    /// Same clock with every time scale divided by `lambda`.
    pub fn rescaled(&self, lambda: f64) -> Self {
        let schedule = match &self.schedule {
            MeanSchedule::Constant(mu0) => MeanSchedule::Constant(mu0 / lambda),
            MeanSchedule::Varying(f) => MeanSchedule::Varying(f.clone()),
        };
        let time_scale = match self.schedule {
            MeanSchedule::Constant(_) => 1.0,
            MeanSchedule::Varying(_) => self.time_scale / lambda,
        };
        Self {
            schedule,
            time_scale,
            sigma: self.sigma / lambda,
        }
    }

    /// Draws one increment for `step`. Non-positive draws are resampled, so the
    /// law is the Gaussian truncated to δt > 0.
    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R, step: usize) -> Result<f64, ClockError> {
        let mu = self.mean_increment(step)?;
        if self.sigma == 0.0 {
            return Ok(mu);
        }
        let normal = Normal::new(mu, self.sigma)
            .map_err(|e| ClockError::InvalidParameter(e.to_string()))?;
        for _ in 0..10_000 {
            let dt = normal.sample(rng);
            if dt > 0.0 {
                return Ok(dt);
            }
        }
        Err(ClockError::InvalidParameter(format!(
            "could not draw a positive increment at step {step} (mu={mu}, sigma={})",
            self.sigma
        )))
    }
}

/// t = ⟨t⟩ + t̃^G after a run of increments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeDecomposition {
    pub expectation_part: f64,
    pub goldstone_part: f64,
}

impl TimeDecomposition {
    pub fn total(&self) -> f64 {
        self.expectation_part + self.goldstone_part
    }
}

#[derive(Debug, Clone)]
pub struct IncrementSample {
    pub increments: Vec<f64>,
    pub decomposition: TimeDecomposition,
}

/// Draws `k` increments with a fixed seed and splits the elapsed time into its
/// expectation and fluctuation parts.
pub fn sample_increments(clock: &ClockModel, k: usize, seed: u64) -> Result<IncrementSample, ClockError> {
    if k == 0 {
        return Err(ClockError::InvalidParameter("need at least one increment".into()));
    }
    let mut rng = rng::stream(seed, 0);
    let mut increments = Vec::with_capacity(k);
    let mut expectation = 0.0;
    let mut goldstone = 0.0;
    for step in 1..=k {
        let mu = clock.mean_increment(step)?;
        let dt = clock.draw(&mut rng, step)?;
        expectation += mu;
        goldstone += dt - mu;
        increments.push(dt);
    }
    let total: f64 = increments.iter().sum();
    let decomposition = TimeDecomposition {
        expectation_part: expectation,
        goldstone_part: goldstone,
    };
    let slack = 1e-9 * (total.abs() + expectation.abs() + goldstone.abs() + 1.0);
    if (total - decomposition.total()).abs() > slack {
        return Err(ClockError::Internal(format!(
            "time decomposition broke: total {total} vs {} + {}",
            expectation, goldstone
        )));
    }
    Ok(IncrementSample {
        increments,
        decomposition,
    })
}

/// A quantum system written in its energy eigenbasis.
#[derive(Debug, Clone)]
pub struct QuantumSystem {
    energies: Vec<f64>,
    hbar: f64,
    initial_density: DMatrix<Complex64>,
}

const DENSITY_TOL: f64 = 1e-12;

impl QuantumSystem {
    pub fn new(
        energies: Vec<f64>,
        hbar: f64,
        initial_density: DMatrix<Complex64>,
    ) -> Result<Self, ClockError> {
        let d = energies.len();
        if d == 0 {
            return Err(ClockError::InvalidParameter("empty energy spectrum".into()));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(ClockError::InvalidParameter(format!("hbar must be positive, got {hbar}")));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(ClockError::InvalidParameter("energies must be finite".into()));
        }
        if initial_density.shape() != (d, d) {
            return Err(ClockError::InvalidDensity(format!(
                "density is {:?}, expected {d}x{d}",
                initial_density.shape()
            )));
        }
        for i in 0..d {
            for j in 0..d {
                if (initial_density[(i, j)] - initial_density[(j, i)].conj()).norm() > DENSITY_TOL {
                    return Err(ClockError::InvalidDensity("not Hermitian".into()));
                }
            }
        }
        let trace: Complex64 = (0..d).map(|i| initial_density[(i, i)]).sum();
        if (trace - Complex64::new(1.0, 0.0)).norm() > DENSITY_TOL {
            return Err(ClockError::InvalidDensity(format!("trace is {trace}, expected 1")));
        }
        let eig = initial_density.clone().symmetric_eigenvalues();
        if eig.iter().any(|&l| l < -DENSITY_TOL) {
            return Err(ClockError::InvalidDensity("not positive semidefinite".into()));
        }
        Ok(Self {
            energies,
            hbar,
            initial_density,
        })
    }

    /// Pure state with equal amplitude on every level.
    pub fn equal_superposition(energies: Vec<f64>, hbar: f64) -> Result<Self, ClockError> {
        let d = energies.len();
        let w = Complex64::new(1.0 / d.max(1) as f64, 0.0);
        Self::new(energies, hbar, DMatrix::from_element(d, d, w))
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dimension(&self) -> usize {
        self.energies.len()
    }

    pub fn initial_density(&self) -> &DMatrix<Complex64> {
        &self.initial_density
    }

    /// Bohr frequency ω_ij = (E_i − E_j)/ħ.
    pub fn frequency(&self, i: usize, j: usize) -> f64 {
        (self.energies[i] - self.energies[j]) / self.hbar
    }

    pub(crate) fn with_energies(&self, energies: Vec<f64>) -> Self {
        Self {
            energies,
            hbar: self.hbar,
            initial_density: self.initial_density.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_variance_increments_are_exact() {
        let clock = ClockModel::broken(1.0, 0.0).unwrap();
        let s = sample_increments(&clock, 5, 3).unwrap();
        assert_eq!(s.increments, vec![1.0; 5]);
        assert_eq!(s.decomposition.goldstone_part, 0.0);
        assert_eq!(s.decomposition.expectation_part, 5.0);
    }

    #[test]
    fn deterministic_schedule_is_traced() {
        let clock = ClockModel::unbroken(|k| 1.0 + 0.5 * (k as f64 / 10.0).sin(), 0.0).unwrap();
        assert!(!clock.symmetry_broken());
        let s = sample_increments(&clock, 50, 0).unwrap();
        for (k, dt) in s.increments.iter().enumerate() {
            assert_eq!(*dt, 1.0 + 0.5 * ((k + 1) as f64 / 10.0).sin());
        }
    }

    #[test]
    fn same_seed_same_draws() {
        let clock = ClockModel::broken(1.0, 0.3).unwrap();
        let a = sample_increments(&clock, 100, 11).unwrap();
        let b = sample_increments(&clock, 100, 11).unwrap();
        let c = sample_increments(&clock, 100, 12).unwrap();
        assert_eq!(a.increments, b.increments);
        assert_ne!(a.increments, c.increments);
    }

    #[test]
    fn large_sample_mean_matches_mu0() {
        let clock = ClockModel::broken(1.0, 0.1).unwrap();
        let s = sample_increments(&clock, 100_000, 2024).unwrap();
        // Independent statistics pass: mean and standard error from scratch.
        let n = s.increments.len() as f64;
        let mean = s.increments.iter().sum::<f64>() / n;
        let var = s.increments.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - 1.0).abs() < 1e-3, "mean={mean}");
        assert!((var.sqrt() - 0.1).abs() < 2e-3);
    }

    #[test]
    fn invalid_clocks_rejected() {
        assert!(ClockModel::broken(0.0, 0.1).is_err());
        assert!(ClockModel::broken(1.0, -0.1).is_err());
        let bad = ClockModel::unbroken(|k| 2.0 - k as f64, 0.0).unwrap();
        assert!(bad.mean_increment(1).is_ok());
        assert!(matches!(bad.mean_increment(2), Err(ClockError::NonPositiveMean { step: 2, .. })));
        assert!(sample_increments(&bad, 3, 0).is_err());
        assert!(sample_increments(&ClockModel::broken(1.0, 0.0).unwrap(), 0, 0).is_err());
    }

    #[test]
    fn density_validation() {
        let rho = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.5, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.5, 0.0),
            ],
        );
        assert!(QuantumSystem::new(vec![0.0, 1.0], 1.0, rho.clone()).is_ok());
        let mut not_herm = rho.clone();
        not_herm[(0, 1)] = Complex64::new(0.5, 0.1);
        assert!(QuantumSystem::new(vec![0.0, 1.0], 1.0, not_herm).is_err());
        let mut bad_trace = rho.clone();
        bad_trace[(0, 0)] = Complex64::new(0.6, 0.0);
        assert!(QuantumSystem::new(vec![0.0, 1.0], 1.0, bad_trace).is_err());
        let mut not_psd = rho;
        not_psd[(0, 1)] = Complex64::new(0.9, 0.0);
        not_psd[(1, 0)] = Complex64::new(0.9, 0.0);
        assert!(QuantumSystem::new(vec![0.0, 1.0], 1.0, not_psd).is_err());
    }
}

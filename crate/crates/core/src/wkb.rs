//! WKB tunneling through the inverted-parabola activation barrier
//! ℋ_int(φ_r) = −J₀φ_r² + ℋ₀ at zero energy.
//!
//! The classical momentum outside the barrier is p = √(−2μ_φℋ_int) and the
//! decay rate inside is ϱ = √(2μ_φℋ_int). The barrier exponent
//! Λ = (1/ħ)∫ₐᵇ ϱ has the closed form (πℋ₀/2ħ)√(2μ_φ/J₀), and the
//! activation rate is T = e^{−2Λ}.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::{integrate, integrate_from_sqrt_root, NumericsError, QuadTolerance};

/// Fraction of the barrier width around each turning point where the WKB
/// forms are not evaluated.
pub const TURNING_POINT_EXCLUSION: f64 = 1e-3;

/// Maximum relative deviation of a finite-difference current from its
/// analytic value before the step is reported as too coarse.
pub const CURRENT_TOLERANCE: f64 = 1e-4;

const QUAD_TOL: QuadTolerance = QuadTolerance { abs: 1e-15, rel: 1e-13 };

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WkbError {
    #[error("invalid barrier parameter: {0}")]
    InvalidParameter(String),
    #[error("φ_r = {phi} is outside the {region:?} region ({detail})")]
    RegionMismatch { region: Region, phi: f64, detail: String },
    #[error("φ_r = {phi} lies within the turning-point exclusion zone")]
    NearTurningPoint { phi: f64 },
    #[error("finite-difference current deviates from the analytic value by {deviation:e} (step too coarse)")]
    CoarseStep { deviation: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// One-dimensional zero-energy tunneling instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierProblem {
    pub hbar: f64,
    pub mu_phi: f64,
    pub j0: f64,
    pub h0: f64,
}

impl BarrierProblem {
    pub fn new(hbar: f64, mu_phi: f64, j0: f64, h0: f64) -> Result<Self, WkbError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(WkbError::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("hbar", hbar)?;
        positive("mu_phi", mu_phi)?;
        positive("J0", j0)?;
        if !(h0 >= 0.0 && h0.is_finite()) {
            return Err(WkbError::InvalidParameter(format!("H0 must be non-negative, got {h0}")));
        }
        Ok(Self { hbar, mu_phi, j0, h0 })
    }

    /// ℋ_int(φ_r) = −J₀φ_r² + ℋ₀.
    pub fn potential(&self, phi: f64) -> f64 {
        -self.j0 * phi * phi + self.h0
    }

    /// Oscillatory momentum p = √(−2μℋ_int), clamped to zero inside the barrier.
    pub fn p(&self, phi: f64) -> f64 {
        (-2.0 * self.mu_phi * self.potential(phi)).max(0.0).sqrt()
    }

    /// Evanescent rate ϱ = √(2μℋ_int), clamped to zero outside the barrier.
    pub fn rho(&self, phi: f64) -> f64 {
        (2.0 * self.mu_phi * self.potential(phi)).max(0.0).sqrt()
    }

    /// Natural length of the parabola, (ħ²/2μJ₀)^{1/4}.
    pub fn natural_length(&self) -> f64 {
        (self.hbar * self.hbar / (2.0 * self.mu_phi * self.j0)).powf(0.25)
    }
}

/// (a, b) = (−√(ℋ₀/J₀), √(ℋ₀/J₀)).
pub fn turning_points(bp: &BarrierProblem) -> (f64, f64) {
    let b = (bp.h0 / bp.j0).sqrt();
    (-b, b)
}

/// Momentum `p` where ℋ_int ≤ 0 and decay rate `rho` where ℋ_int ≥ 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Momenta {
    pub p: Option<f64>,
    pub rho: Option<f64>,
}

pub fn momenta(bp: &BarrierProblem, phi: f64) -> Momenta {
    let v = bp.potential(phi);
    Momenta {
        p: (v <= 0.0).then(|| (-2.0 * bp.mu_phi * v).sqrt()),
        rho: (v >= 0.0).then(|| (2.0 * bp.mu_phi * v).sqrt()),
    }
}

pub fn barrier_exponent_closed_form(bp: &BarrierProblem) -> f64 {
    PI * bp.h0 / (2.0 * bp.hbar) * (2.0 * bp.mu_phi / bp.j0).sqrt()
}

/// Λ by adaptive quadrature of ϱ between the turning points. The substitution
/// φ = b·sin θ turns the square-root endpoints into the smooth integrand
/// √(2μJ₀)·b²cos²θ.
pub fn barrier_exponent(bp: &BarrierProblem) -> Result<f64, WkbError> {
    if bp.h0 == 0.0 {
        return Ok(0.0);
    }
    let (_, b) = turning_points(bp);
    let r = integrate(
        |theta: f64| {
            let phi = b * theta.sin();
            bp.rho(phi) * b * theta.cos()
        },
        -FRAC_PI_2,
        FRAC_PI_2,
        QUAD_TOL,
    )?;
    Ok(r.value / bp.hbar)
}

/// T = exp(−(πℋ₀/ħ)√(2μ_φ/J₀)).
pub fn activation_rate(bp: &BarrierProblem) -> f64 {
    (-2.0 * barrier_exponent_closed_form(bp)).exp()
}

/// T = e^{−2Λ} with Λ from quadrature.
pub fn activation_rate_quadrature(bp: &BarrierProblem) -> Result<f64, WkbError> {
    Ok((-2.0 * barrier_exponent(bp)?).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Incoming,
    UnderBarrier,
    Outgoing,
}

/// Three-region WKB solution of the reduced zero-energy problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WkbSolution {
    pub problem: BarrierProblem,
    pub turning_points: (f64, f64),
    pub barrier_exponent: f64,
    pub transmission: f64,
    pub normalization: Complex64,
}

impl WkbSolution {
    pub fn new(bp: &BarrierProblem) -> Self {
        let lambda = barrier_exponent_closed_form(bp);
        Self {
            problem: *bp,
            turning_points: turning_points(bp),
            barrier_exponent: lambda,
            transmission: (-2.0 * lambda).exp(),
            normalization: Complex64::new(1.0, 0.0),
        }
    }

    pub fn with_normalization(mut self, c: Complex64) -> Self {
        self.normalization = c;
        self
    }

    fn check_region(&self, region: Region, phi: f64) -> Result<(), WkbError> {
        let (a, b) = self.turning_points;
        let inside = match region {
            Region::Incoming => phi < a,
            Region::UnderBarrier => a < phi && phi < b,
            Region::Outgoing => phi > b,
        };
        if !inside {
            return Err(WkbError::RegionMismatch {
                region,
                phi,
                detail: format!("turning points a={a}, b={b}"),
            });
        }
        let guard = TURNING_POINT_EXCLUSION * (b - a);
        if (phi - a).abs() < guard || (phi - b).abs() < guard {
            return Err(WkbError::NearTurningPoint { phi });
        }
        Ok(())
    }

    /// Evaluates ψ_in, ψ_tr or ψ_out at `phi`.
    pub fn wavefunction(&self, region: Region, phi: f64) -> Result<Complex64, WkbError> {
        self.check_region(region, phi)?;
        let bp = &self.problem;
        let (a, b) = self.turning_points;
        let c = self.normalization;
        let minus_i = Complex64::new(0.0, -1.0);
        match region {
            Region::Incoming => {
                let p = bp.p(phi);
                if p == 0.0 {
                    return Err(WkbError::NearTurningPoint { phi });
                }
                // ∫_φ^a p = −∫_a^φ p
                let action = -integrate_from_sqrt_root(|x| bp.p(x), a, phi, QUAD_TOL)?.value;
                let phase = action / bp.hbar - FRAC_PI_4;
                Ok(self.barrier_exponent.exp() * minus_i * c / p.sqrt()
                    * Complex64::from_polar(1.0, phase))
            }
            Region::UnderBarrier => {
                let rho = bp.rho(phi);
                if rho == 0.0 {
                    return Err(WkbError::NearTurningPoint { phi });
                }
                let decay = integrate_from_sqrt_root(|x| bp.rho(x), b, phi, QUAD_TOL)?.value;
                Ok(minus_i * c / rho.sqrt() * (-decay / bp.hbar).exp())
            }
            Region::Outgoing => {
                let p = bp.p(phi);
                if p == 0.0 {
                    return Err(WkbError::NearTurningPoint { phi });
                }
                let action = integrate_from_sqrt_root(|x| bp.p(x), b, phi, QUAD_TOL)?.value;
                let phase = action / bp.hbar - FRAC_PI_4;
                Ok(c / p.sqrt() * Complex64::from_polar(1.0, phase))
            }
        }
    }

    /// Analytic current (ħ/μ)·Im(ψ*ψ′) of the oscillatory forms: |c|²/μ for
    /// ψ_out and −e^{2Λ}|c|²/μ for ψ_in, whose phase decreases with φ_r.
    pub fn analytic_current(&self, region: Region) -> Option<f64> {
        let flux = self.normalization.norm_sqr() / self.problem.mu_phi;
        match region {
            Region::Incoming => Some(-(2.0 * self.barrier_exponent).exp() * flux),
            Region::Outgoing => Some(flux),
            Region::UnderBarrier => None,
        }
    }

    /// j = (ħ/μ)·Im(ψ*·dψ/dφ_r) with a central difference of step `h`.
    pub fn probability_current(&self, region: Region, phi: f64, h: f64) -> Result<f64, WkbError> {
        let psi = self.wavefunction(region, phi)?;
        let plus = self.wavefunction(region, phi + h)?;
        let minus = self.wavefunction(region, phi - h)?;
        let derivative = (plus - minus) / (2.0 * h);
        Ok(self.problem.hbar / self.problem.mu_phi * (psi.conj() * derivative).im)
    }
}

/// Evaluates one of the three displayed WKB forms.
pub fn wkb_wavefunction(sol: &WkbSolution, region: Region, phi: f64) -> Result<Complex64, WkbError> {
    sol.wavefunction(region, phi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentRatio {
    /// |j_out| / |j_in|.
    pub ratio: f64,
    pub j_in: f64,
    pub j_out: f64,
    pub phi_in: f64,
    pub phi_out: f64,
}

/// Transmission from finite-difference probability currents of ψ_in and ψ_out,
/// sampled one barrier width (or one natural length, if larger) outside the
/// turning points.
pub fn current_ratio(sol: &WkbSolution) -> Result<CurrentRatio, WkbError> {
    let bp = &sol.problem;
    let (a, b) = sol.turning_points;
    let offset = (b - a).max(bp.natural_length());
    let phi_in = a - offset;
    let phi_out = b + offset;
    let step = |phi: f64| 1e-3 * offset.min(bp.hbar / bp.p(phi));
    let j_in = sol.probability_current(Region::Incoming, phi_in, step(phi_in))?;
    let j_out = sol.probability_current(Region::Outgoing, phi_out, step(phi_out))?;
    for (measured, region) in [(j_in, Region::Incoming), (j_out, Region::Outgoing)] {
        let expected = sol.analytic_current(region).expect("oscillatory region");
        let deviation = ((measured - expected) / expected).abs();
        if deviation > CURRENT_TOLERANCE {
            return Err(WkbError::CoarseStep { deviation });
        }
    }
    Ok(CurrentRatio {
        ratio: j_out.abs() / j_in.abs(),
        j_in,
        j_out,
        phi_in,
        phi_out,
    })
}

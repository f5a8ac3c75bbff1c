//! Exact one-dimensional stationary scattering by transfer matrices.
//!
//! The potential is sampled on a grid and held constant on each cell at the
//! mean of its endpoint values. Starting from a pure transmitted wave on the
//! right, (ψ, ψ′) is carried leftwards cell by cell with the exact
//! constant-potential propagator and decomposed into incident and reflected
//! waves on the left. Amplitudes are rescaled in the log domain whenever they
//! grow past 1e100, so thick barriers never overflow.

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::linspace;
use crate::wkb::{turning_points, BarrierProblem};

const RESCALE_ABOVE: f64 = 1e100;

/// Allowed excess of T over one before the estimate is reported as broken.
pub const UNITARITY_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("energy {energy} does not exceed the asymptotic level {level}; no propagating wave")]
    NotPropagating { energy: f64, level: f64 },
    #[error("propagation failed: {0}")]
    PropagationFailed(String),
    #[error("grid is not uniform (spacing varies by {0:e})")]
    NonUniformGrid(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePotential {
    grid: Vec<f64>,
    values: Vec<f64>,
    left_level: f64,
    right_level: f64,
}

impl PiecewisePotential {
    pub fn new(
        grid: Vec<f64>,
        values: Vec<f64>,
        left_level: f64,
        right_level: f64,
    ) -> Result<Self, OracleError> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(OracleError::InvalidPotential(format!(
                "need at least two samples with matching lengths, got {} grid points and {} values",
                grid.len(),
                values.len()
            )));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(OracleError::InvalidPotential("grid must be strictly increasing".into()));
        }
        if grid.iter().chain(&values).chain([&left_level, &right_level]).any(|v| !v.is_finite()) {
            return Err(OracleError::InvalidPotential("non-finite sample".into()));
        }
        Ok(Self { grid, values, left_level, right_level })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn left_level(&self) -> f64 {
        self.left_level
    }

    pub fn right_level(&self) -> f64 {
        self.right_level
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Every other sample, always keeping the last one.
    pub fn coarsened(&self) -> Self {
        let last = self.grid.len() - 1;
        let mut idx: Vec<usize> = (0..=last).step_by(2).collect();
        if *idx.last().expect("non-empty") != last {
            idx.push(last);
        }
        Self {
            grid: idx.iter().map(|&i| self.grid[i]).collect(),
            values: idx.iter().map(|&i| self.values[i]).collect(),
            left_level: self.left_level,
            right_level: self.right_level,
        }
    }
}

/// Samples ℋ_int(φ_r) = −J₀φ_r² + ℋ₀ at `n` uniform points on [−L, L] with
/// flat continuation at −J₀L² + ℋ₀ outside.
pub fn cap_barrier(bp: &BarrierProblem, l: f64, n: usize) -> Result<PiecewisePotential, OracleError> {
    let (_, b) = turning_points(bp);
    if !(l > b && l.is_finite()) {
        return Err(OracleError::InvalidParameter(format!(
            "cap L = {l} must exceed the turning point {b}"
        )));
    }
    if n < 100 {
        return Err(OracleError::InvalidParameter(format!("need n ≥ 100 samples, got {n}")));
    }
    let grid = linspace(-l, l, n);
    let values = grid.iter().map(|&x| bp.potential(x)).collect();
    let level = bp.potential(l);
    PiecewisePotential::new(grid, values, level, level)
}

/// Default cap: four times the turning-point distance, or four natural
/// lengths when ℋ₀ = 0 leaves no barrier.
pub fn default_cap(bp: &BarrierProblem) -> f64 {
    let b = turning_points(bp).1;
    4.0 * if b > 0.0 { b } else { bp.natural_length() }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionEstimate {
    pub t_numeric: f64,
    pub grid_points: usize,
    /// |T(n) − T(coarse)|/3, the second-order Richardson error estimate.
    pub richardson_error: f64,
    /// (4T(n) − T(coarse))/3.
    pub extrapolated: f64,
}

/// Stationary state normalized to unit incident amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringState {
    pub grid: Vec<f64>,
    pub psi: Vec<Complex64>,
    pub transmission: f64,
    pub reflection: f64,
}

/// cos(√q²·h) and sin(√q²·h)/√q², continued to cosh/sinh for q² < 0.
fn cell_propagator(q2: f64, h: f64) -> (f64, f64) {
    let x2 = q2 * h * h;
    if x2.abs() < 1e-8 {
        let c = 1.0 - x2 / 2.0 + x2 * x2 / 24.0;
        let s = h * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
        (c, s)
    } else if q2 > 0.0 {
        let k = q2.sqrt();
        ((k * h).cos(), (k * h).sin() / k)
    } else {
        let kappa = (-q2).sqrt();
        ((kappa * h).cosh(), (kappa * h).sinh() / kappa)
    }
}

struct Propagated {
    /// (ψ, ψ′) at each grid point with its accumulated log scale.
    states: Vec<(Complex64, Complex64, f64)>,
    k_left: f64,
    k_right: f64,
}

fn propagate(
    pot: &PiecewisePotential,
    energy: f64,
    hbar: f64,
    mu: f64,
) -> Result<Propagated, OracleError> {
    if !(hbar > 0.0 && mu > 0.0 && hbar.is_finite() && mu.is_finite()) {
        return Err(OracleError::InvalidParameter(format!(
            "hbar and mu must be positive, got {hbar}, {mu}"
        )));
    }
    for level in [pot.left_level, pot.right_level] {
        if !(energy > level) {
            return Err(OracleError::NotPropagating { energy, level });
        }
    }
    let scale = 2.0 * mu / (hbar * hbar);
    let k_left = (scale * (energy - pot.left_level)).sqrt();
    let k_right = (scale * (energy - pot.right_level)).sqrt();

    let n = pot.grid.len();
    let mut states = vec![(Complex64::default(), Complex64::default(), 0.0); n];
    let mut psi = Complex64::new(1.0, 0.0);
    let mut dpsi = Complex64::new(0.0, k_right);
    let mut log_scale = 0.0;
    states[n - 1] = (psi, dpsi, log_scale);
    for j in (0..n - 1).rev() {
        let h = pot.grid[j + 1] - pot.grid[j];
        let v = 0.5 * (pot.values[j] + pot.values[j + 1]);
        let q2 = scale * (energy - v);
        let (c, s) = cell_propagator(q2, h);
        let next_psi = psi * c - dpsi * s;
        dpsi = psi * (q2 * s) + dpsi * c;
        psi = next_psi;
        let size = psi.norm().max(dpsi.norm() / k_left);
        if !size.is_finite() {
            return Err(OracleError::PropagationFailed(format!(
                "non-finite amplitude at φ = {}",
                pot.grid[j]
            )));
        }
        if size > RESCALE_ABOVE {
            psi /= size;
            dpsi /= size;
            log_scale += size.ln();
        }
        states[j] = (psi, dpsi, log_scale);
    }
    Ok(Propagated { states, k_left, k_right })
}

/// Incident amplitude at the left edge as (unit-modulus-scaled value, log scale).
fn incident(p: &Propagated) -> (Complex64, Complex64, f64) {
    let (psi, dpsi, log_scale) = p.states[0];
    let ik = Complex64::new(0.0, p.k_left);
    let a = (psi + dpsi / ik) * 0.5;
    let b = (psi - dpsi / ik) * 0.5;
    (a, b, log_scale)
}

fn transmission_of(p: &Propagated) -> Result<f64, OracleError> {
    let (a, _, log_scale) = incident(p);
    let log_t = (p.k_right / p.k_left).ln() - 2.0 * (a.norm().ln() + log_scale);
    let t = log_t.exp();
    if !t.is_finite() {
        return Err(OracleError::PropagationFailed(format!("transmission evaluated to {t}")));
    }
    if t > 1.0 + UNITARITY_SLACK {
        return Err(OracleError::PropagationFailed(format!("transmission {t} exceeds unity")));
    }
    Ok(t)
}

/// Transmission probability at `energy` with a Richardson error estimate from
/// the grid coarsened by a factor of two.
pub fn transfer_matrix_transmission(
    pot: &PiecewisePotential,
    energy: f64,
    hbar: f64,
    mu: f64,
) -> Result<TransmissionEstimate, OracleError> {
    let fine = transmission_of(&propagate(pot, energy, hbar, mu)?)?;
    let coarse = transmission_of(&propagate(&pot.coarsened(), energy, hbar, mu)?)?;
    Ok(TransmissionEstimate {
        t_numeric: fine,
        grid_points: pot.len(),
        richardson_error: (fine - coarse).abs() / 3.0,
        extrapolated: (4.0 * fine - coarse) / 3.0,
    })
}

/// Full stationary solution on the grid, normalized to unit incident amplitude.
pub fn scattering_state(
    pot: &PiecewisePotential,
    energy: f64,
    hbar: f64,
    mu: f64,
) -> Result<ScatteringState, OracleError> {
    let p = propagate(pot, energy, hbar, mu)?;
    let transmission = transmission_of(&p)?;
    let (a, b, log_a) = incident(&p);
    let psi = p
        .states
        .iter()
        .map(|&(psi, _, log_scale)| psi / a * (log_scale - log_a).exp())
        .collect();
    Ok(ScatteringState {
        grid: pot.grid.clone(),
        psi,
        transmission,
        reflection: (b / a).norm_sqr(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintResidual {
    /// RMS of (−ħ²∇² + 2μ_φℋ_int)ψ over interior points.
    pub rms: f64,
    /// `rms` divided by the larger of the RMS kinetic and potential terms.
    pub relative: f64,
}

/// Applies (−ħ²∇² + 2μ_φℋ_int)ψ with the three-point second difference on a
/// uniform grid.
pub fn constraint_residual(
    psi: &[Complex64],
    pot: &PiecewisePotential,
    hbar: f64,
    mu: f64,
) -> Result<ConstraintResidual, OracleError> {
    let n = pot.len();
    if n < 5 || psi.len() != n {
        return Err(OracleError::InvalidParameter(format!(
            "need at least 5 samples matching the grid, got {} values on {} points",
            psi.len(),
            n
        )));
    }
    let h = (pot.grid[n - 1] - pot.grid[0]) / (n - 1) as f64;
    let spread = pot
        .grid
        .windows(2)
        .map(|w| ((w[1] - w[0]) - h).abs())
        .fold(0.0, f64::max);
    if spread > 1e-9 * h {
        return Err(OracleError::NonUniformGrid(spread));
    }
    let (mut res, mut kin, mut potl) = (0.0, 0.0, 0.0);
    for j in 1..n - 1 {
        let kinetic = -hbar * hbar * (psi[j + 1] - 2.0 * psi[j] + psi[j - 1]) / (h * h);
        let potential = 2.0 * mu * pot.values[j] * psi[j];
        res += (kinetic + potential).norm_sqr();
        kin += kinetic.norm_sqr();
        potl += potential.norm_sqr();
    }
    let m = (n - 2) as f64;
    let rms = (res / m).sqrt();
    let reference = (kin / m).sqrt().max((potl / m).sqrt());
    Ok(ConstraintResidual {
        rms,
        relative: if reference > 0.0 { rms / reference } else { rms },
    })
}

/// 1/(1 + e^{2Λ}), the exact transmission of an uncapped inverted parabola at
/// its top-referenced energy.
pub fn inverted_parabola_transmission(lambda: f64) -> f64 {
    1.0 / (1.0 + (2.0 * lambda).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wkb::barrier_exponent_closed_form;

    fn unit() -> BarrierProblem {
        BarrierProblem::new(1.0, 1.0, 1.0, 1.0).unwrap()
    }

    fn flat(level: f64, lo: f64, hi: f64, n: usize) -> PiecewisePotential {
        PiecewisePotential::new(linspace(lo, hi, n), vec![level; n], level, level).unwrap()
    }

    fn rectangle(v0: f64, width: f64, n: usize) -> PiecewisePotential {
        // Cells inside [0, width] carry v0; the grid edges sit on the walls.
        let grid = linspace(0.0, width, n);
        PiecewisePotential::new(grid, vec![v0; n], 0.0, 0.0).unwrap()
    }

    /// Textbook opaque-region rectangular barrier, E < V0.
    fn rectangle_oracle(v0: f64, width: f64, e: f64, hbar: f64, mu: f64) -> f64 {
        let kappa = (2.0 * mu * (v0 - e)).sqrt() / hbar;
        1.0 / (1.0 + v0 * v0 * (kappa * width).sinh().powi(2) / (4.0 * e * (v0 - e)))
    }

    #[test]
    fn cap_examples() {
        let pot = cap_barrier(&unit(), 3.0, 101).unwrap();
        assert_eq!(pot.left_level(), -8.0);
        assert_eq!(pot.right_level(), -8.0);
        assert!(cap_barrier(&unit(), 1.0, 100).is_err());
        assert!(cap_barrier(&unit(), 3.0, 99).is_err());
        let a = cap_barrier(&unit(), 3.0, 101).unwrap();
        let b = cap_barrier(&unit(), 3.0, 201).unwrap();
        for i in 0..101 {
            assert_eq!(a.grid()[i], b.grid()[2 * i]);
            assert_eq!(a.values()[i], b.values()[2 * i]);
        }
    }

    #[test]
    fn free_propagation_is_transparent() {
        for e in [0.1, 1.0, 7.5] {
            let est = transfer_matrix_transmission(&flat(0.0, -3.0, 3.0, 500), e, 1.0, 1.0).unwrap();
            assert!((est.t_numeric - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn rectangular_barrier_matches_closed_form() {
        let est = transfer_matrix_transmission(&rectangle(2.0, 1.0, 200), 1.0, 1.0, 1.0).unwrap();
        let exact = rectangle_oracle(2.0, 1.0, 1.0, 1.0, 1.0);
        assert!((exact - 0.210_771_1).abs() < 1e-7);
        assert!((est.t_numeric - exact).abs() < 1e-12);
        // κ = 1 case.
        let est = transfer_matrix_transmission(&rectangle(2.0, 1.0, 200), 1.0, 1.0, 0.5).unwrap();
        assert!((est.t_numeric - 0.419_974_3).abs() < 1e-6);
    }

    #[test]
    fn step_down_flux_uses_wavenumber_ratio() {
        // Abrupt step from level 0 to −3 at E = 1: T = 4k₁k₂/(k₁+k₂)².
        let grid = linspace(-1.0, 1.0, 101);
        let values = vec![0.0; 101];
        let pot = PiecewisePotential::new(grid, values, 0.0, -3.0).unwrap();
        let est = transfer_matrix_transmission(&pot, 1.0, 1.0, 1.0).unwrap();
        let (k1, k2) = (2f64.sqrt(), 8f64.sqrt());
        assert!((est.t_numeric - 4.0 * k1 * k2 / (k1 + k2).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn capped_parabola_against_exact_parabola() {
        let bp = unit();
        let pot = cap_barrier(&bp, 4.0, 20_000).unwrap();
        let est = transfer_matrix_transmission(&pot, 0.0, 1.0, 1.0).unwrap();
        let exact = inverted_parabola_transmission(barrier_exponent_closed_form(&bp));
        assert!((exact - 1.162_524_5e-2).abs() < 1e-9);
        assert!(((est.t_numeric - exact) / exact).abs() < 0.1);
        assert!(est.richardson_error < 1e-6 * est.t_numeric);
    }

    #[test]
    fn grid_refinement_converges() {
        let bp = unit();
        let t = |n| {
            let pot = cap_barrier(&bp, 4.0, n).unwrap();
            transfer_matrix_transmission(&pot, 0.0, 1.0, 1.0).unwrap().t_numeric
        };
        let (a, b) = (t(20_000), t(40_000));
        assert!(((a - b) / b).abs() < 1e-6);
    }

    #[test]
    fn thick_barrier_does_not_overflow() {
        // Λ ≈ 333: the propagated amplitude reaches e^{333} ≈ 1e144.
        let bp = BarrierProblem::new(1.0, 1.0, 1.0, 150.0).unwrap();
        let pot = cap_barrier(&bp, default_cap(&bp), 40_000).unwrap();
        let est = transfer_matrix_transmission(&pot, 0.0, 1.0, 1.0).unwrap();
        let wkb = (-2.0 * barrier_exponent_closed_form(&bp)).exp();
        assert!(est.t_numeric > 0.0 && est.t_numeric < 1e-280);
        assert!(((est.t_numeric - wkb) / wkb).abs() < 0.1);
    }

    #[test]
    fn non_propagating_energy_rejected() {
        let pot = flat(0.0, -1.0, 1.0, 10);
        assert!(matches!(
            transfer_matrix_transmission(&pot, 0.0, 1.0, 1.0),
            Err(OracleError::NotPropagating { .. })
        ));
    }

    #[test]
    fn unitarity_of_scattering_state() {
        let pot = cap_barrier(&unit(), 4.0, 4_000).unwrap();
        let s = scattering_state(&pot, 0.0, 1.0, 1.0).unwrap();
        assert!((s.transmission + s.reflection - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constraint_residual_examples() {
        let pot = flat(0.0, 0.0, 1.0, 50);
        let psi = vec![Complex64::new(0.3, -0.2); 50];
        assert_eq!(constraint_residual(&psi, &pot, 1.0, 1.0).unwrap().rms, 0.0);

        let k = 3.0;
        let plane = |n: usize| {
            let pot = flat(-k * k / 2.0, 0.0, 2.0, n);
            let psi: Vec<Complex64> = pot.grid().iter().map(|&x| Complex64::from_polar(1.0, k * x)).collect();
            constraint_residual(&psi, &pot, 1.0, 1.0).unwrap().rms
        };
        let ratio = plane(201) / plane(401);
        assert!((ratio - 4.0).abs() < 0.01, "ratio {ratio}");

        let uneven = PiecewisePotential::new(vec![0.0, 1.0, 2.0, 3.0, 5.0], vec![0.0; 5], 0.0, 0.0).unwrap();
        assert!(matches!(
            constraint_residual(&[Complex64::default(); 5], &uneven, 1.0, 1.0),
            Err(OracleError::NonUniformGrid(_))
        ));
    }

    #[test]
    fn oracle_solution_satisfies_constraint() {
        let residual = |n| {
            let pot = cap_barrier(&unit(), 4.0, n).unwrap();
            let s = scattering_state(&pot, 0.0, 1.0, 1.0).unwrap();
            constraint_residual(&s.psi, &pot, 1.0, 1.0).unwrap().relative
        };
        let (r1, r2) = (residual(10_000), residual(20_000));
        // What remains is the stencil's own h² truncation.
        assert!((r1 / r2 - 4.0).abs() < 0.1, "{r1} {r2}");
        assert!(r2 < 1e-6, "relative residual {r2}");
    }
}

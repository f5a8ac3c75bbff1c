//! The scale factor as a clock, da/dt = 2N(t)·dS/da, and matter evolution
//! iħ∂ₜχ = N(t)ℋ_q(a(t))χ along it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{MiniSuperspaceError, MiniSuperspaceModel};
use crate::numerics::expm;
use crate::numerics::ode::{integrate_scalar, OdeTolerance};

/// Largest per-step change of ‖χ‖ accepted from the unitary propagator.
const STEP_NORM_DRIFT: f64 = 1e-12;

/// Lapse samples used to check N(t) > 0.
const LAPSE_SAMPLES: usize = 256;

/// Gauss–Legendre nodes on [0, 1] for the fourth-order Magnus step.
const GAUSS: [f64; 2] = [0.5 - 0.288_675_134_594_812_9, 0.5 + 0.288_675_134_594_812_9];
const SQRT3_OVER_12: f64 = 0.144_337_567_297_406_44;

#[derive(Debug, Clone, PartialEq)]
pub struct ClockTrajectory {
    pub times: Vec<f64>,
    pub a: Vec<f64>,
    /// a(t) left the working range before the last requested time.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatterTrajectory {
    pub times: Vec<f64>,
    pub a: Vec<f64>,
    pub chi: Vec<DVector<Complex64>>,
    pub truncated: bool,
    /// max |‖χ(t)‖ − 1| over stored times.
    pub max_norm_drift: f64,
}

fn check_lapse(model: &MiniSuperspaceModel, t0: f64, t1: f64) -> Result<(), MiniSuperspaceError> {
    for k in 0..=LAPSE_SAMPLES {
        let t = t0 + (t1 - t0) * k as f64 / LAPSE_SAMPLES as f64;
        let n = model.lapse(t);
        if !(n > 0.0 && n.is_finite()) {
            return Err(MiniSuperspaceError::NonPositiveLapse { t, value: n });
        }
    }
    Ok(())
}

/// Integrates da/dt = 2N(t)√U(a) from a(t₀) = a₀ to each output time. Leaving
/// [a_lo, a_hi] ends the run with a warning and `truncated` set.
pub fn clock_map(
    model: &MiniSuperspaceModel,
    a0: f64,
    a_range: (f64, f64),
    t0: f64,
    outputs: &[f64],
) -> Result<ClockTrajectory, MiniSuperspaceError> {
    let (a_lo, a_hi) = a_range;
    if !(a_lo <= a0 && a0 <= a_hi) {
        return Err(MiniSuperspaceError::InvalidParameter(format!(
            "a0 = {a0} outside the working range [{a_lo}, {a_hi}]"
        )));
    }
    model.phase_gradient(a0)?;
    if let Some(&last) = outputs.last() {
        check_lapse(model, t0, last)?;
    }
    let sol = integrate_scalar(
        |t, a| 2.0 * model.lapse(t) * model.potential(a).max(0.0).sqrt(),
        t0,
        a0,
        outputs,
        OdeTolerance::default(),
        |_, a| a < a_lo || a > a_hi,
    )?;
    if sol.stopped_early {
        log::warn!(
            "scale factor left [{a_lo}, {a_hi}]; clock truncated after {} of {} outputs",
            sol.times.len(),
            outputs.len()
        );
    }
    Ok(ClockTrajectory {
        times: sol.times,
        a: sol.values,
        truncated: sol.stopped_early,
    })
}

fn commutator(x: &DMatrix<Complex64>, y: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    x * y - y * x
}

/// Fourth-order Magnus propagator exp(h/2·(A₁+A₂) + √3/12·h²[A₂, A₁]).
pub(crate) fn magnus_step(
    a1: &DMatrix<Complex64>,
    a2: &DMatrix<Complex64>,
    h: f64,
) -> Result<DMatrix<Complex64>, MiniSuperspaceError> {
    let omega = (a1 + a2) * Complex64::new(0.5 * h, 0.0)
        + commutator(a2, a1) * Complex64::new(SQRT3_OVER_12 * h * h, 0.0);
    Ok(expm(&omega)?)
}

pub(crate) fn apply_step(
    u: &DMatrix<Complex64>,
    chi: &DVector<Complex64>,
) -> Result<DVector<Complex64>, MiniSuperspaceError> {
    let next = u * chi;
    let drift = (next.norm() - chi.norm()).abs();
    if drift > STEP_NORM_DRIFT {
        return Err(MiniSuperspaceError::NormDrift(drift));
    }
    Ok(next)
}

pub(crate) fn check_initial_state(
    model: &MiniSuperspaceModel,
    chi0: &DVector<Complex64>,
) -> Result<(), MiniSuperspaceError> {
    if chi0.len() != model.matter_dimension() {
        return Err(MiniSuperspaceError::InvalidParameter(format!(
            "initial matter state has {} components, model has {}",
            chi0.len(),
            model.matter_dimension()
        )));
    }
    let norm = chi0.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(MiniSuperspaceError::NotNormalized(norm));
    }
    Ok(())
}

/// Evolves χ with `substeps` Magnus steps between consecutive output times,
/// taking a(t) from the clock at the Gauss nodes.
pub fn evolve_matter(
    model: &MiniSuperspaceModel,
    a0: f64,
    a_range: (f64, f64),
    t0: f64,
    outputs: &[f64],
    chi0: &DVector<Complex64>,
    substeps: usize,
) -> Result<MatterTrajectory, MiniSuperspaceError> {
    check_initial_state(model, chi0)?;
    if substeps == 0 {
        return Err(MiniSuperspaceError::InvalidParameter("substeps must be positive".into()));
    }
    // Clock samples: for every substep its two Gauss nodes and its end.
    let mut fine = Vec::with_capacity(outputs.len() * substeps * 3);
    let mut prev = t0;
    for &target in outputs {
        let h = (target - prev) / substeps as f64;
        for j in 0..substeps {
            let start = prev + h * j as f64;
            fine.push(start + GAUSS[0] * h);
            fine.push(start + GAUSS[1] * h);
            fine.push(if j + 1 == substeps { target } else { start + h });
        }
        prev = target;
    }
    let clock = clock_map(model, a0, a_range, t0, &fine)?;
    let generator = |t: f64, a: f64| -> Result<DMatrix<Complex64>, MiniSuperspaceError> {
        let scale = Complex64::new(0.0, -model.lapse(t) / model.hbar());
        Ok(model.matter_hamiltonian(a)? * scale)
    };

    let mut traj = MatterTrajectory {
        times: Vec::with_capacity(outputs.len()),
        a: Vec::with_capacity(outputs.len()),
        chi: Vec::with_capacity(outputs.len()),
        truncated: clock.truncated,
        max_norm_drift: 0.0,
    };
    let mut chi = chi0.clone();
    let mut prev = t0;
    let mut idx = 0;
    'outer: for &target in outputs {
        let h = (target - prev) / substeps as f64;
        for j in 0..substeps {
            if idx + 2 >= clock.times.len() {
                break 'outer;
            }
            let start = prev + h * j as f64;
            let a1 = generator(start + GAUSS[0] * h, clock.a[idx])?;
            let a2 = generator(start + GAUSS[1] * h, clock.a[idx + 1])?;
            chi = apply_step(&magnus_step(&a1, &a2, h)?, &chi)?;
            idx += 3;
        }
        traj.times.push(target);
        traj.a.push(clock.a[idx - 1]);
        traj.max_norm_drift = traj.max_norm_drift.max((chi.norm() - 1.0).abs());
        traj.chi.push(chi.clone());
        prev = target;
    }
    Ok(traj)
}

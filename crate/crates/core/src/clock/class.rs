//! Superposition retention time, quantum-class rescaling and partitioning.

use super::{ClockError, ClockModel, CoherenceTrajectory, QuantumSystem};

/// Default retention threshold on |ρ_ij(k)/ρ_ij(0)|.
pub const DEFAULT_THRESHOLD: f64 = 1.0 / std::f64::consts::E;

/// Relative slack on ln(threshold) when deciding whether the threshold was
/// reached. Accumulated per-step exponents land on the threshold only up to
/// rounding, so the crossing test is `ln ratio ≤ ln threshold` within 1e-9.
const CROSSING_SLACK: f64 = 1e-9;

/// Elementwise tolerance for placing two profiles in the same class.
pub const CLASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Retention {
    Reached { steps: usize, time: f64 },
    /// Threshold never crossed within the simulated horizon.
    NotReached { horizon_steps: usize, horizon_time: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumClassRecord {
    pub retention: Retention,
    /// μ₀ for a broken-symmetry clock; `None` when μ varies with the step.
    pub mean_increment: Option<f64>,
    /// Per-step damping exponent of the slowest-decaying coherent pair, up to
    /// and including the retention step (or over the horizon).
    pub dimensionless_profile: Vec<f64>,
}

impl QuantumClassRecord {
    pub fn retention_steps(&self) -> Option<usize> {
        match self.retention {
            Retention::Reached { steps, .. } => Some(steps),
            Retention::NotReached { .. } => None,
        }
    }

    /// Physical retention time; infinite when the threshold was never crossed.
    pub fn retention_time(&self) -> f64 {
        match self.retention {
            Retention::Reached { time, .. } => time,
            Retention::NotReached { .. } => f64::INFINITY,
        }
    }

    pub fn symmetry_broken(&self) -> bool {
        self.mean_increment.is_some()
    }

    /// Zero-retention records (threshold crossed on the first step) are the
    /// quantum-mechanically trivial class.
    pub fn is_trivial(&self) -> bool {
        matches!(self.retention, Retention::Reached { steps, .. } if steps <= 1)
    }
}

/// First step at which every initially coherent pair has decayed to
/// `threshold` of its initial magnitude.
pub fn retention_time(
    traj: &CoherenceTrajectory,
    threshold: f64,
) -> Result<QuantumClassRecord, ClockError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(ClockError::InvalidParameter(format!(
            "retention threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let coherent: Vec<usize> = (0..traj.pairs.len())
        .filter(|&p| traj.coherence_magnitude(0, p) > 0.0)
        .collect();
    if coherent.is_empty() {
        return Err(ClockError::NoCoherence);
    }
    let log_threshold = threshold.ln();
    let crossing = log_threshold * (1.0 - CROSSING_SLACK);

    let mut retention = Retention::NotReached {
        horizon_steps: traj.steps(),
        horizon_time: traj.times[traj.steps()],
    };
    for k in 1..=traj.steps() {
        let worst = coherent
            .iter()
            .map(|&p| (traj.coherence_magnitude(k, p) / traj.coherence_magnitude(0, p)).ln())
            .fold(f64::NEG_INFINITY, f64::max);
        if worst <= crossing {
            retention = Retention::Reached {
                steps: k,
                time: traj.times[k],
            };
            break;
        }
    }

    let profile_len = match retention {
        Retention::Reached { steps, .. } => steps,
        Retention::NotReached { horizon_steps, .. } => horizon_steps,
    };
    let dimensionless_profile = traj.damping_exponents[..profile_len]
        .iter()
        .map(|row| coherent.iter().map(|&p| row[p]).fold(f64::INFINITY, f64::min))
        .collect();

    Ok(QuantumClassRecord {
        retention,
        mean_increment: traj.mu0,
        dimensionless_profile,
    })
}

/// Joint renormalization E → λE, μ → μ/λ, σ → σ/λ. ω·μ and ω·σ are unchanged,
/// so the step-indexed dephasing history is too.
pub fn rescale_class(
    sys: &QuantumSystem,
    clock: &ClockModel,
    lambda: f64,
) -> Result<(QuantumSystem, ClockModel), ClockError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(ClockError::InvalidParameter(format!(
            "rescaling factor must be positive, got {lambda}"
        )));
    }
    let energies = sys.energies().iter().map(|e| e * lambda).collect();
    Ok((sys.with_energies(energies), clock.rescaled(lambda)))
}

fn same_class(a: &QuantumClassRecord, b: &QuantumClassRecord) -> bool {
    a.dimensionless_profile.len() == b.dimensionless_profile.len()
        && a
            .dimensionless_profile
            .iter()
            .zip(&b.dimensionless_profile)
            .all(|(x, y)| (x - y).abs() <= CLASS_TOLERANCE)
}

/// Partitions record indices into quantum classes. Each record joins the first
/// class whose founding member it matches, so the output is a partition for
/// any input order.
pub fn classify(records: &[QuantumClassRecord]) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (idx, rec) in records.iter().enumerate() {
        match classes.iter_mut().find(|c| same_class(&records[c[0]], rec)) {
            Some(class) => class.push(idx),
            None => classes.push(vec![idx]),
        }
    }
    classes
}

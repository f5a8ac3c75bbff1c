//! Monotonic time reparametrizations t → f(t) and their action on event logs.

use std::fmt;
use std::sync::Arc;

use super::{ClockError, CoherenceTrajectory};

/// Samples used when checking monotonicity over an interval.
const MONOTONICITY_SAMPLES: usize = 1024;

#[derive(Clone)]
pub struct Reparametrization {
    label: String,
    map: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for Reparametrization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Reparametrization").field("label", &self.label).finish()
    }
}

impl Reparametrization {
    pub fn new<F>(label: impl Into<String>, map: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            map: Arc::new(map),
        }
    }

    pub fn identity() -> Self {
        Self::new("t", |t| t)
    }

    /// Σ c_k t^k (increasing on t ≥ 0 when every c_k ≥ 0 and some c_k>0, k≥1).
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        let label = format!("poly{coeffs:?}");
        Self::new(label, move |t| coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c))
    }

    /// a·e^{b t} + c.
    pub fn exponential(a: f64, b: f64, c: f64) -> Self {
        Self::new(format!("{a}*exp({b}t)+{c}"), move |t| a * (b * t).exp() + c)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn apply(&self, t: f64) -> f64 {
        (self.map)(t)
    }

    /// `then ∘ self`.
    pub fn then(&self, then: &Reparametrization) -> Reparametrization {
        let f = self.map.clone();
        let g = then.map.clone();
        Reparametrization {
            label: format!("{}∘{}", then.label, self.label),
            map: Arc::new(move |t| g(f(t))),
        }
    }

    /// True when f is finite and strictly increasing on a uniform sample of
    /// `[lo, hi]` together with the extra points.
    pub fn is_increasing_on(&self, lo: f64, hi: f64, extra: &[f64]) -> bool {
        let mut pts: Vec<f64> = (0..=MONOTONICITY_SAMPLES)
            .map(|i| lo + (hi - lo) * i as f64 / MONOTONICITY_SAMPLES as f64)
            .chain(extra.iter().copied())
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let vals: Vec<f64> = pts.iter().map(|&t| self.apply(t)).collect();
        // Points a few ulps apart may legitimately map to the same value.
        let tiny = 1e-12 * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        vals.iter().all(|v| v.is_finite())
            && pts.windows(2).zip(vals.windows(2)).all(|(t, v)| {
                if t[1] - t[0] > tiny {
                    v[1] > v[0]
                } else {
                    v[1] >= v[0]
                }
            })
    }

    /// Numerical inverse on a bracketing interval by bisection.
    pub fn inverse(&self, y: f64, mut lo: f64, mut hi: f64) -> Result<f64, ClockError> {
        let (flo, fhi) = (self.apply(lo), self.apply(hi));
        if !(flo <= y && y <= fhi) {
            return Err(ClockError::InvalidParameter(format!(
                "value {y} not bracketed by f([{lo}, {hi}]) = [{flo}, {fhi}]"
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.apply(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Maps every stored time (and so every event time) through `f`. Coherences,
/// event steps and their order are untouched.
pub fn reparametrize_events(
    traj: &CoherenceTrajectory,
    f: &Reparametrization,
) -> Result<CoherenceTrajectory, ClockError> {
    let lo = traj.times[0];
    let hi = *traj.times.last().expect("trajectory has an initial time");
    if !f.is_increasing_on(lo, hi, &traj.times) {
        return Err(ClockError::NonMonotonic(f.label().to_string()));
    }
    let mut out = traj.clone();
    for t in &mut out.times {
        *t = f.apply(*t);
    }
    for e in &mut out.events {
        e.time = f.apply(e.time);
    }
    Ok(out)
}

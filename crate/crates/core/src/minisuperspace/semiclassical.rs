//! Hamilton–Jacobi phase and amplitude transport on a scale-factor grid.

use super::{MiniSuperspaceError, MiniSuperspaceModel};
use crate::numerics::{integrate, linspace, QuadTolerance};

const QUAD_TOL: QuadTolerance = QuadTolerance { abs: 1e-15, rel: 1e-14 };

/// Potential samples per grid cell when screening for Euclidean points.
const SCREEN_PER_CELL: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    pub a_grid: Vec<f64>,
    /// S(a) with S(a₀) = 0.
    pub s: Vec<f64>,
    /// dS/da = √U(a).
    pub s_prime: Vec<f64>,
}

/// ∫ₐ₀^a √U by adaptive quadrature.
pub fn phase_between(model: &MiniSuperspaceModel, from: f64, to: f64) -> Result<f64, MiniSuperspaceError> {
    Ok(integrate(|x| model.potential(x).max(0.0).sqrt(), from, to, QUAD_TOL)?.value)
}

/// S on `points` uniform samples of [a_lo, a_hi], accumulated cell by cell.
pub fn hamilton_jacobi_phase(
    model: &MiniSuperspaceModel,
    a_lo: f64,
    a_hi: f64,
    points: usize,
) -> Result<PhaseProfile, MiniSuperspaceError> {
    if points < 2 || !(a_lo < a_hi) {
        return Err(MiniSuperspaceError::InvalidParameter(format!(
            "need at least two points on a non-empty range, got {points} on [{a_lo}, {a_hi}]"
        )));
    }
    for a in linspace(a_lo, a_hi, (points - 1) * SCREEN_PER_CELL + 1) {
        model.phase_gradient(a)?;
    }
    let a_grid = linspace(a_lo, a_hi, points);
    let mut s = Vec::with_capacity(points);
    s.push(0.0);
    for w in a_grid.windows(2) {
        let prev = *s.last().expect("seeded");
        s.push(prev + phase_between(model, w[0], w[1])?);
    }
    let s_prime = a_grid
        .iter()
        .map(|&a| model.phase_gradient(a))
        .collect::<Result<_, _>>()?;
    Ok(PhaseProfile { a_grid, s, s_prime })
}

/// A = (S′)^{−1/2} scaled so that A(a₀) = 1.
pub fn amplitude_transport(profile: &PhaseProfile) -> Result<Vec<f64>, MiniSuperspaceError> {
    if let Some(i) = profile.s_prime.iter().position(|&d| !(d > 0.0)) {
        return Err(MiniSuperspaceError::Caustic(profile.a_grid[i]));
    }
    let d0 = profile.s_prime[0];
    Ok(profile.s_prime.iter().map(|&d| (d0 / d).sqrt()).collect())
}

/// Five-point first derivative at `x` of a function sampled by `f`.
fn derivative5(f: impl Fn(f64) -> Result<f64, MiniSuperspaceError>, x: f64, h: f64) -> Result<f64, MiniSuperspaceError> {
    Ok((f(x - 2.0 * h)? - 8.0 * f(x - h)? + 8.0 * f(x + h)? - f(x + 2.0 * h)?) / (12.0 * h))
}

/// max |(dS/da)² − U| / max U at cell midpoints, with dS/da differentiated
/// from the quadrature-built phase.
pub fn hamilton_jacobi_defect(
    model: &MiniSuperspaceModel,
    profile: &PhaseProfile,
) -> Result<f64, MiniSuperspaceError> {
    let mut worst: f64 = 0.0;
    let mut u_max: f64 = 0.0;
    for (i, w) in profile.a_grid.windows(2).enumerate() {
        let mid = 0.5 * (w[0] + w[1]);
        let h = 0.2 * (w[1] - w[0]);
        let s_at = |x: f64| Ok(profile.s[i] + phase_between(model, w[0], x)?);
        let ds = derivative5(s_at, mid, h)?;
        let u = model.potential(mid);
        worst = worst.max((ds * ds - u).abs());
        u_max = u_max.max(u);
    }
    for &a in &profile.a_grid {
        u_max = u_max.max(model.potential(a));
    }
    Ok(if u_max > 0.0 { worst / u_max } else { worst })
}

fn stencil_first(v: &[f64], i: usize, h: f64) -> f64 {
    (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * h)
}

/// RMS of A·S″ + 2A′S′ over interior points (fourth-order differences),
/// relative to the larger of the two terms' RMS.
pub fn transport_residual(profile: &PhaseProfile, amplitude: &[f64]) -> Result<f64, MiniSuperspaceError> {
    let n = profile.a_grid.len();
    if n < 5 || amplitude.len() != n {
        return Err(MiniSuperspaceError::InvalidParameter(format!(
            "need at least 5 grid points with matching amplitude, got {n} and {}",
            amplitude.len()
        )));
    }
    let h = (profile.a_grid[n - 1] - profile.a_grid[0]) / (n - 1) as f64;
    let (mut res, mut t1, mut t2) = (0.0, 0.0, 0.0);
    for i in 2..n - 2 {
        let a_s2 = amplitude[i] * stencil_first(&profile.s_prime, i, h);
        let a1_s1 = 2.0 * stencil_first(amplitude, i, h) * profile.s_prime[i];
        res += (a_s2 + a1_s1).powi(2);
        t1 += a_s2 * a_s2;
        t2 += a1_s1 * a1_s1;
    }
    let reference = t1.max(t2).sqrt();
    Ok(if reference > 0.0 { res.sqrt() / reference } else { res.sqrt() })
}

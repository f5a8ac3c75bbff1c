//! Adaptive Dormand–Prince 5(4) integrator for scalar ODEs y' = f(t, y).

use super::NumericsError;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct OdeTolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_steps: usize,
}

impl Default for OdeTolerance {
    fn default() -> Self {
        Self {
            rel: 1e-12,
            abs: 1e-14,
            max_steps: 2_000_000,
        }
    }
}

/// Outcome of [`integrate_scalar`]: values at the requested output times, or
/// fewer if `stop` fired first.
#[derive(Debug, Clone)]
pub struct ScalarSolution {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub stopped_early: bool,
}

/// Integrates from `(t0, y0)` through the increasing `outputs`. `stop(t, y)`
/// is checked after every accepted step; once it returns true integration ends
/// and only the outputs reached so far are returned.
pub fn integrate_scalar<F, S>(
    f: F,
    t0: f64,
    y0: f64,
    outputs: &[f64],
    tol: OdeTolerance,
    stop: S,
) -> Result<ScalarSolution, NumericsError>
where
    F: Fn(f64, f64) -> f64,
    S: Fn(f64, f64) -> bool,
{
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.first().is_some_and(|&t| t < t0) {
        return Err(NumericsError::InvalidInput(
            "output times must be non-decreasing and not before t0".into(),
        ));
    }
    let mut t = t0;
    let mut y = y0;
    let mut times = Vec::with_capacity(outputs.len());
    let mut values = Vec::with_capacity(outputs.len());
    let span = outputs.last().map_or(0.0, |&last| last - t0);
    let mut h = if span > 0.0 { span * 1e-3 } else { 1e-3 };
    let mut steps = 0usize;

    for &target in outputs {
        while t < target {
            if steps >= tol.max_steps {
                return Err(NumericsError::NotConverged(format!(
                    "ODE step budget exhausted at t={t}"
                )));
            }
            steps += 1;
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            let mut k = [0.0; 7];
            for i in 0..7 {
                let yi = y + step * (0..i).map(|j| A[i][j] * k[j]).sum::<f64>();
                k[i] = f(t + C[i] * step, yi);
            }
            let y5 = y + step * (0..7).map(|i| B5[i] * k[i]).sum::<f64>();
            let y4 = y + step * (0..7).map(|i| B4[i] * k[i]).sum::<f64>();
            if !y5.is_finite() {
                return Err(NumericsError::NonFinite(format!("ODE state at t={t}")));
            }
            let scale = tol.abs + tol.rel * y.abs().max(y5.abs());
            let err = (y5 - y4).abs() / scale;
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y5;
                if stop(t, y) {
                    return Ok(ScalarSolution {
                        times,
                        values,
                        stopped_early: true,
                    });
                }
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 && last {
                // Keep the unclipped step size for the next segment.
                h = h.max(step * factor);
            } else {
                h = step * factor;
            }
            if h < f64::EPSILON * t.abs().max(1.0) {
                return Err(NumericsError::NotConverged(format!(
                    "ODE step underflow at t={t}"
                )));
            }
        }
        times.push(target);
        values.push(y);
    }
    Ok(ScalarSolution {
        times,
        values,
        stopped_early: false,
    })
}

//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate drops below `max(abs_tol, rel_tol * |I|)`. Error estimates follow
//! the QUADPACK `qk15` heuristic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::NumericsError;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadTolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for QuadTolerance {
    fn default() -> Self {
        Self {
            abs: 1e-14,
            rel: 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut fv = [0.0; 14];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv[2 * j] = f1;
        fv[2 * j + 1] = f2;
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv[2 * j] - mean).abs() + (fv[2 * j + 1] - mean).abs());
    }
    let abs_half = half.abs();
    asc *= abs_half;
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    Segment {
        lo,
        hi,
        value: kronrod * half,
        error,
    }
}

/// Integrates `f` over `[lo, hi]` (either orientation).
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: QuadTolerance,
) -> Result<QuadResult, NumericsError> {
    if !lo.is_finite() || !hi.is_finite() {
        return Err(NumericsError::InvalidInput(format!(
            "quadrature bounds must be finite, got [{lo}, {hi}]"
        )));
    }
    if lo == hi {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let first = kronrod15(&f, lo, hi);
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    while total_err > tol.abs.max(tol.rel * total.abs()) {
        if heap.len() >= MAX_INTERVALS {
            return Err(NumericsError::NotConverged(format!(
                "quadrature on [{lo}, {hi}] stalled at error {total_err:e} after {MAX_INTERVALS} intervals"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        let left = kronrod15(&f, worst.lo, mid);
        let right = kronrod15(&f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        // Bisection no longer refines: accept what double precision allows.
        if (mid - worst.lo).abs() <= f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
        heap.push(left);
        heap.push(right);
    }
    if !total.is_finite() {
        return Err(NumericsError::NonFinite("quadrature".into()));
    }
    // Re-sum to shed the drift from incremental updates.
    let mut segments: Vec<Segment> = heap.into_vec();
    segments.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let value = segments.iter().map(|s| s.value).sum();
    let error = segments.iter().map(|s| s.error).sum();
    Ok(QuadResult {
        value,
        error,
        intervals: segments.len(),
    })
}

/// Integrates a function that vanishes like a square root at `root` and is
/// smooth elsewhere on `[root, other]`. Substitutes `x = root + (other - root) u²`,
/// which turns the `sqrt(x - root)` behaviour into a polynomial one.
pub fn integrate_from_sqrt_root<F: Fn(f64) -> f64>(
    f: F,
    root: f64,
    other: f64,
    tol: QuadTolerance,
) -> Result<QuadResult, NumericsError> {
    let span = other - root;
    integrate(
        |u| {
            let x = root + span * u * u;
            f(x) * 2.0 * span * u
        },
        0.0,
        1.0,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x| 3.0 * x * x + 2.0 * x + 1.0, 0.0, 2.0, QuadTolerance::default())
            .unwrap();
        assert!((r.value - 14.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let tol = QuadTolerance::default();
        let a = integrate(f64::sin, 0.0, 1.0, tol).unwrap().value;
        let b = integrate(f64::sin, 1.0, 0.0, tol).unwrap().value;
        assert!((a + b).abs() < 1e-15);
        assert!((a - (1.0 - 1f64.cos())).abs() < 1e-14);
    }

    #[test]
    fn semicircle_area_with_endpoint_singularity() {
        // ∫_{-1}^{1} sqrt(1-x²) dx = π/2; sqrt-singular derivative at both ends.
        let r = integrate(
            |x: f64| (1.0 - x * x).max(0.0).sqrt(),
            -1.0,
            1.0,
            QuadTolerance { abs: 1e-12, rel: 1e-12 },
        )
        .unwrap();
        assert!((r.value - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }

    #[test]
    fn sqrt_root_substitution() {
        // ∫_1^2 sqrt(x-1) dx = 2/3
        let r = integrate_from_sqrt_root(|x| (x - 1.0).sqrt(), 1.0, 2.0, QuadTolerance::default())
            .unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-14);
        // Works leftwards too: ∫_{-2}^{-1} sqrt(-1-x) dx = 2/3, oriented from -1 to -2.
        let r = integrate_from_sqrt_root(
            |x| (-1.0 - x).max(0.0).sqrt(),
            -1.0,
            -2.0,
            QuadTolerance::default(),
        )
        .unwrap();
        assert!((r.value + 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn non_finite_bounds_rejected() {
        assert!(integrate(|x| x, 0.0, f64::INFINITY, QuadTolerance::default()).is_err());
    }
}

//! Plug-in Shannon entropy rate of spike histories.

use std::collections::HashMap;

use super::GlianetError;

/// Below this many windows per occupied pattern the histogram is undersampled.
pub const MIN_COUNTS_PER_BIN: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyEstimate {
    pub bits_per_step: f64,
    pub windows: usize,
    pub occupied: usize,
    pub undersampled: bool,
}

/// Entropy of the empirical distribution of length-`window` sliding patterns,
/// divided by `window`.
pub fn entropy_rate(history: &[Vec<i8>], window: usize) -> Result<EntropyEstimate, GlianetError> {
    if window == 0 || history.len() < window {
        return Err(GlianetError::InvalidParameter(format!(
            "history of length {} is shorter than window {window}",
            history.len()
        )));
    }
    let n = history[0].len();
    if history.iter().any(|s| s.len() != n) {
        return Err(GlianetError::ShapeMismatch("spike vectors differ in length".into()));
    }
    let mut counts: HashMap<Vec<i8>, usize> = HashMap::new();
    for w in history.windows(window) {
        *counts.entry(w.concat()).or_default() += 1;
    }
    let windows = history.len() - window + 1;
    let total = windows as f64;
    // Sum in a fixed order so the estimate is independent of hash iteration.
    let mut c: Vec<usize> = counts.values().copied().collect();
    c.sort_unstable();
    let bits: f64 = c
        .iter()
        .map(|&k| {
            let p = k as f64 / total;
            -p * p.log2()
        })
        .sum();
    Ok(EntropyEstimate {
        bits_per_step: bits / window as f64,
        windows,
        occupied: counts.len(),
        undersampled: total / (counts.len() as f64) < MIN_COUNTS_PER_BIN,
    })
}

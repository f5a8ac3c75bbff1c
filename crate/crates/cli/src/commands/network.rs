//! `network`: gauge checks, the single-site reduction, Hopfield rolldown and
//! spike-train entropy.

use qobs_core::glianet::{
    ek_comparison, entropy_rate, gauge_transform, glauber_history, hamiltonian_full,
    hebbian_couplings, rolldown, GaugeTransformation, GlialField, NeuralState,
};
use qobs_core::numerics::rng::stream;
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use crate::config::{key, Key, Params};
use crate::error::{CliError, Result};
use crate::table::{int, real, ResultTable};

pub const KEYS: &[Key] = &[
    key("mode", "gauge-check"),
    key("n", "4"),
    key("N", "4"),
    key("beta", "1"),
    key("draws", "8"),
    key("samples", "20000"),
    key("seed", "0"),
    key("h0", "0"),
    key("trials", "50"),
    key("patterns", "1"),
    key("flips", "1"),
    key("sweeps", "100"),
    key("steps", "10000"),
    key("window", "1,2,3"),
];

pub const MODES: [&str; 4] = ["gauge-check", "ek", "rolldown", "entropy"];

fn sizes(p: &Params, k: &str) -> Result<Vec<usize>> {
    p.f64_list(k)?
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 && v <= 1e6 {
                Ok(v as usize)
            } else {
                Err(CliError::Validation(format!("{k}: expected positive integers, got {v}")))
            }
        })
        .collect()
}

fn random_pattern(rng: &mut impl Rng, n: usize) -> Vec<i8> {
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}

pub fn run(p: &Params) -> Result<Vec<ResultTable>> {
    match p.str("mode") {
        "gauge-check" => gauge_check(p).map(|t| vec![t]),
        "ek" => ek(p),
        "rolldown" => rolldown_runs(p).map(|t| vec![t]),
        "entropy" => entropy(p).map(|t| vec![t]),
        other => Err(CliError::Validation(format!(
            "mode must be one of {MODES:?}, got {other:?}"
        ))),
    }
}

/// Trial 0 is the identity transformation; trials 1.. are random.
fn gauge_check(p: &Params) -> Result<ResultTable> {
    let n = p.usize("n")?;
    let h0 = p.f64("h0")?;
    let trials = p.usize("trials")?;
    let seed = p.u64("seed")?;
    let mut t = ResultTable::new(
        "network_gauge",
        vec![int("n"), int("N"), int("trial"), real("h_int"), real("h_int_transformed"), real("relative_change")],
    );
    for big_n in sizes(p, "N")? {
        if n == 0 {
            return Err(CliError::Validation("n must be positive".into()));
        }
        let rows = (0..=trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = stream(seed, ((big_n as u64) << 32) | trial as u64);
                let phi = NeuralState::random(&mut rng, n, big_n);
                let g = GlialField::random(&mut rng, n, big_n, 1.0 / (big_n as f64).sqrt());
                let o = if trial == 0 {
                    GaugeTransformation::identity(n, big_n)
                } else {
                    GaugeTransformation::random(&mut rng, n, big_n)
                };
                let before = hamiltonian_full(&phi, &g, h0)?;
                let (phi2, g2) = gauge_transform(&phi, &g, &o)?;
                let after = hamiltonian_full(&phi2, &g2, h0)?;
                let rel = (after - before).abs() / before.abs().max(1.0);
                Ok(vec![n as f64, big_n as f64, trial as f64, before, after, rel])
            })
            .collect::<Result<Vec<_>>>()?;
        for r in rows {
            t.push(r);
        }
    }
    Ok(t)
}

fn ek(p: &Params) -> Result<Vec<ResultTable>> {
    let n = p.usize("n")?;
    let beta = p.f64("beta")?;
    let draws = p.usize("draws")?;
    let samples = p.usize("samples")?;
    let seed = p.u64("seed")?;
    let mut summary = ResultTable::new(
        "network_ek",
        vec![
            int("n"),
            int("N"),
            real("beta"),
            int("draws"),
            real("median_discrepancy"),
            real("median_standard_error"),
            int("starved"),
        ],
    );
    let mut per_draw = ResultTable::new(
        "network_ek_draws",
        vec![
            int("N"),
            int("draw"),
            real("free_energy_full"),
            real("free_energy_reduced"),
            real("discrepancy"),
            real("standard_error"),
        ],
    );
    for big_n in sizes(p, "N")? {
        let s = ek_comparison(n, big_n, beta, draws, samples, seed)?;
        summary.push(vec![
            n as f64,
            big_n as f64,
            beta,
            draws as f64,
            s.median_discrepancy,
            s.median_standard_error,
            f64::from(u8::from(s.starved)),
        ]);
        for (k, d) in s.draws.iter().enumerate() {
            per_draw.push(vec![
                big_n as f64,
                k as f64,
                d.free_energy_full,
                d.free_energy_reduced,
                d.discrepancy,
                d.standard_error,
            ]);
        }
    }
    Ok(vec![summary, per_draw])
}

/// Each trial stores `patterns` random patterns and starts from the first
/// one with `flips` distinct bits inverted.
fn rolldown_runs(p: &Params) -> Result<ResultTable> {
    let n = p.usize("n")?;
    let patterns = p.usize("patterns")?;
    let flips = p.usize("flips")?;
    let trials = p.usize("trials")?;
    let max_sweeps = p.usize("sweeps")?;
    let seed = p.u64("seed")?;
    if n == 0 || patterns == 0 || flips > n {
        return Err(CliError::Validation(format!(
            "need n ≥ 1, patterns ≥ 1 and flips ≤ n, got n = {n}, patterns = {patterns}, flips = {flips}"
        )));
    }
    let rows = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream(seed, trial as u64);
            let stored: Vec<Vec<i8>> = (0..patterns).map(|_| random_pattern(&mut rng, n)).collect();
            let jc = hebbian_couplings(&stored)?;
            let mut start = stored[0].clone();
            for i in sample(&mut rng, n, flips) {
                start[i] = -start[i];
            }
            let traj = rolldown(&start, &jc, max_sweeps)?;
            let monotone = traj.energies.windows(2).all(|w| w[1] <= w[0]);
            Ok(vec![
                trial as f64,
                traj.sweeps as f64,
                traj.updates as f64,
                traj.energies[0],
                *traj.energies.last().expect("initial energy"),
                f64::from(u8::from(monotone)),
                f64::from(u8::from(traj.final_state() == stored[0].as_slice())),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = ResultTable::new(
        "network_rolldown",
        vec![
            int("trial"),
            int("sweeps"),
            int("updates"),
            real("initial_energy"),
            real("final_energy"),
            int("monotone"),
            int("recovered"),
        ],
    );
    for r in rows {
        t.push(r);
    }
    Ok(t)
}

/// Glauber history at inverse temperature `beta` around stored patterns.
fn entropy(p: &Params) -> Result<ResultTable> {
    let n = p.usize("n")?;
    let patterns = p.usize("patterns")?;
    let steps = p.usize("steps")?;
    let beta = p.f64("beta")?;
    let seed = p.u64("seed")?;
    if n == 0 || patterns == 0 {
        return Err(CliError::Validation("n and patterns must be positive".into()));
    }
    let mut rng = stream(seed, 0);
    let stored: Vec<Vec<i8>> = (0..patterns).map(|_| random_pattern(&mut rng, n)).collect();
    let jc = hebbian_couplings(&stored)?;
    let history = glauber_history(&stored[0], &jc, beta, steps, &mut stream(seed, 1))?;
    let mut t = ResultTable::new(
        "network_entropy",
        vec![int("window"), real("bits_per_step"), int("windows"), int("occupied"), int("undersampled")],
    );
    for w in sizes(p, "window")? {
        let e = entropy_rate(&history, w)?;
        t.push(vec![
            w as f64,
            e.bits_per_step,
            e.windows as f64,
            e.occupied as f64,
            f64::from(u8::from(e.undersampled)),
        ]);
    }
    Ok(t)
}

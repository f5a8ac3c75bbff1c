//! `clock`: coherence decay under a stochastic time increment and the
//! resulting retention time.

use qobs_core::clock::{
    evolve_analytic, evolve_monte_carlo, retention_time, ClockModel, CoherenceTrajectory,
    QuantumClassRecord, QuantumSystem,
};

use crate::config::{key, Key, Params};
use crate::error::Result;
use crate::table::{int, real, Column, ResultTable};

pub const KEYS: &[Key] = &[
    key("energies", "0,1"),
    key("hbar", "1"),
    key("mu0", "1"),
    key("sigma", "0.1"),
    key("steps", "400"),
    key("samples", "0"),
    key("seed", "0"),
    key("threshold", "0.36787944117144233"),
];

/// Analytic ensemble average when `samples` is 0, Monte Carlo otherwise.
fn evolve(p: &Params) -> Result<(CoherenceTrajectory, QuantumClassRecord)> {
    let sys = QuantumSystem::equal_superposition(p.f64_list("energies")?, p.f64("hbar")?)?;
    let clock = ClockModel::broken(p.f64("mu0")?, p.f64("sigma")?)?;
    let steps = p.usize("steps")?;
    let samples = p.usize("samples")?;
    let traj = if samples == 0 {
        evolve_analytic(&sys, &clock, steps)?
    } else {
        evolve_monte_carlo(&sys, &clock, steps, samples, p.u64("seed")?)?
    };
    let record = retention_time(&traj, p.f64("threshold")?)?;
    Ok((traj, record))
}

pub fn summary_columns() -> Vec<Column> {
    vec![
        int("retention_steps"),
        real("retention_time"),
        int("reached"),
        int("trivial"),
        int("events"),
        real("damping_exponent"),
    ]
}

/// Retention steps is the horizon when the threshold is never crossed.
fn summary(traj: &CoherenceTrajectory, record: &QuantumClassRecord) -> Vec<f64> {
    let reached = record.retention_steps();
    let fit_to = reached.unwrap_or(traj.steps()).max(1);
    vec![
        reached.unwrap_or(traj.steps()) as f64,
        record.retention_time(),
        f64::from(u8::from(reached.is_some())),
        f64::from(u8::from(record.is_trivial())),
        traj.event_count() as f64,
        traj.fitted_damping_exponent(0, fit_to),
    ]
}

pub fn summary_row(p: &Params) -> Result<Vec<f64>> {
    let (traj, record) = evolve(p)?;
    Ok(summary(&traj, &record))
}

pub fn run(p: &Params) -> Result<Vec<ResultTable>> {
    let (traj, record) = evolve(p)?;
    let mut t = ResultTable::new(
        "clock",
        vec![int("step"), real("time"), int("pair"), real("coherence"), int("events_so_far")],
    );
    for step in 0..=traj.steps() {
        for pair in 0..traj.pairs.len() {
            t.push(vec![
                step as f64,
                traj.times[step],
                pair as f64,
                traj.coherence_magnitude(step, pair),
                traj.events_through(step) as f64,
            ]);
        }
    }
    let mut s = ResultTable::new("clock_summary", summary_columns());
    s.push(summary(&traj, &record));
    Ok(vec![t, s])
}

//! Density-matrix evolution under the stochastic clock.
//!
//! In the energy basis a unitary step of length δt multiplies ρ_ij by
//! exp(−i ω_ij δt). Averaging over the Gaussian increment gives the
//! characteristic function exp(−i ω μ − ω²σ²/2), which is what
//! [`evolve_analytic`] applies; [`evolve_monte_carlo`] averages sampled
//! unitary trajectories instead.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{ClockError, ClockModel, QuantumSystem};
use crate::numerics::{fit_slope, rng};

/// A step at which the clock applied non-unitary damping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonUnitaryEvent {
    pub step: usize,
    pub time: f64,
}

#[derive(Debug, Clone)]
pub struct CoherenceTrajectory {
    pub dimension: usize,
    /// Index pairs (i, j), i < j, in row-major order.
    pub pairs: Vec<(usize, usize)>,
    /// Time after each step; `times[0] = 0`.
    pub times: Vec<f64>,
    /// ρ_ij per step and pair, `coherences[0]` is the initial state.
    pub coherences: Vec<Vec<Complex64>>,
    /// diag(ρ) per step.
    pub populations: Vec<Vec<f64>>,
    /// Per-step damping exponent per pair (entry k−1 belongs to step k).
    pub damping_exponents: Vec<Vec<f64>>,
    /// Per-step phase advance ω_ij·μ per pair (analytic path) or the measured
    /// phase change (sampled path).
    pub phase_increments: Vec<Vec<f64>>,
    pub events: Vec<NonUnitaryEvent>,
    /// μ₀ of the generating clock when its symmetry was broken.
    pub mu0: Option<f64>,
}

impl CoherenceTrajectory {
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn coherence_magnitude(&self, step: usize, pair: usize) -> f64 {
        self.coherences[step][pair].norm()
    }

    pub fn trace(&self, step: usize) -> f64 {
        self.populations[step].iter().sum()
    }

    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    /// Number of non-unitary events at or before `step`.
    pub fn events_through(&self, step: usize) -> usize {
        self.events.partition_point(|e| e.step <= step)
    }

    /// Least-squares per-step damping exponent of `pair`, fitted to
    /// −ln|ρ_ij(k)/ρ_ij(0)| over steps 1..=`max_step`.
    pub fn fitted_damping_exponent(&self, pair: usize, max_step: usize) -> f64 {
        let c0 = self.coherence_magnitude(0, pair);
        let upto = max_step.min(self.steps());
        let mut x = vec![0.0];
        let mut y = vec![0.0];
        for k in 1..=upto {
            x.push(k as f64);
            y.push(-(self.coherence_magnitude(k, pair) / c0).ln());
        }
        fit_slope(&x, &y)
    }
}

fn pair_list(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect()
}

fn populations(sys: &QuantumSystem) -> Vec<f64> {
    (0..sys.dimension()).map(|i| sys.initial_density()[(i, i)].re).collect()
}

/// Ensemble-averaged evolution with the exact Gaussian characteristic function.
pub fn evolve_analytic(
    sys: &QuantumSystem,
    clock: &ClockModel,
    steps: usize,
) -> Result<CoherenceTrajectory, ClockError> {
    let d = sys.dimension();
    let pairs = pair_list(d);
    let omegas: Vec<f64> = pairs.iter().map(|&(i, j)| sys.frequency(i, j)).collect();
    let sigma = clock.sigma();
    let initial: Vec<Complex64> = pairs.iter().map(|&(i, j)| sys.initial_density()[(i, j)]).collect();
    let pops = populations(sys);

    let mut times = Vec::with_capacity(steps + 1);
    let mut coherences = Vec::with_capacity(steps + 1);
    let mut damping = Vec::with_capacity(steps);
    let mut phases = Vec::with_capacity(steps);
    let mut events = Vec::new();
    times.push(0.0);
    coherences.push(initial);

    let mut t = 0.0;
    for step in 1..=steps {
        let mu = clock.mean_increment(step)?;
        t = clock.expected_time(step, t)?;
        let step_phase: Vec<f64> = omegas.iter().map(|w| w * mu).collect();
        let step_damp: Vec<f64> = omegas.iter().map(|w| 0.5 * (w * sigma).powi(2)).collect();
        let prev = coherences.last().expect("initial state pushed");
        let next: Vec<Complex64> = prev
            .iter()
            .zip(step_phase.iter().zip(&step_damp))
            .map(|(c, (&ph, &dm))| c * Complex64::from_polar((-dm).exp(), -ph))
            .collect();
        coherences.push(next);
        phases.push(step_phase);
        damping.push(step_damp);
        times.push(t);
        if sigma > 0.0 {
            events.push(NonUnitaryEvent { step, time: t });
        }
    }

    Ok(CoherenceTrajectory {
        dimension: d,
        pairs,
        times,
        populations: vec![pops; steps + 1],
        coherences,
        damping_exponents: damping,
        phase_increments: phases,
        events,
        mu0: clock.mu0(),
    })
}

/// Sample chunks are fixed independently of the thread pool so the reduction
/// order, and therefore every bit of the result, depends only on `seed`.
const MAX_CHUNKS: usize = 64;

struct ChunkSums {
    coherence: Vec<Vec<Complex64>>,
    time: Vec<f64>,
}

/// Averages U(δt) ρ U(δt)† over `samples` independently drawn increment
/// sequences.
pub fn evolve_monte_carlo(
    sys: &QuantumSystem,
    clock: &ClockModel,
    steps: usize,
    samples: usize,
    seed: u64,
) -> Result<CoherenceTrajectory, ClockError> {
    if samples == 0 {
        return Err(ClockError::InvalidParameter("need at least one sample".into()));
    }
    let d = sys.dimension();
    let pairs = pair_list(d);
    let omegas: Vec<f64> = pairs.iter().map(|&(i, j)| sys.frequency(i, j)).collect();
    let initial: Vec<Complex64> = pairs.iter().map(|&(i, j)| sys.initial_density()[(i, j)]).collect();
    let n_pairs = pairs.len();

    let chunks = samples.min(MAX_CHUNKS);
    let partial: Result<Vec<ChunkSums>, ClockError> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * samples / chunks;
            let hi = (c + 1) * samples / chunks;
            let mut rng = rng::stream(seed, c as u64);
            let mut sums = ChunkSums {
                coherence: vec![vec![Complex64::new(0.0, 0.0); n_pairs]; steps],
                time: vec![0.0; steps],
            };
            for _ in lo..hi {
                let mut t = 0.0;
                for step in 1..=steps {
                    t += clock.draw(&mut rng, step)?;
                    sums.time[step - 1] += t;
                    for (p, (&w, &c0)) in omegas.iter().zip(&initial).enumerate() {
                        sums.coherence[step - 1][p] += c0 * Complex64::from_polar(1.0, -w * t);
                    }
                }
            }
            Ok(sums)
        })
        .collect();
    let partial = partial?;

    let norm = 1.0 / samples as f64;
    let mut times = vec![0.0];
    let mut coherences = vec![initial.clone()];
    for step in 0..steps {
        let mut tsum = 0.0;
        let mut csum = vec![Complex64::new(0.0, 0.0); n_pairs];
        for chunk in &partial {
            tsum += chunk.time[step];
            for p in 0..n_pairs {
                csum[p] += chunk.coherence[step][p];
            }
        }
        times.push(tsum * norm);
        coherences.push(csum.into_iter().map(|c| c * norm).collect());
    }

    let mut damping = Vec::with_capacity(steps);
    let mut phases = Vec::with_capacity(steps);
    for k in 1..=steps {
        damping.push(
            (0..n_pairs)
                .map(|p| {
                    let prev = coherences[k - 1][p].norm();
                    if prev == 0.0 {
                        0.0
                    } else {
                        -(coherences[k][p].norm() / prev).ln()
                    }
                })
                .collect(),
        );
        phases.push(
            (0..n_pairs)
                .map(|p| -(coherences[k][p] / coherences[k - 1][p]).arg())
                .collect(),
        );
    }
    let events = if clock.sigma() > 0.0 {
        (1..=steps)
            .map(|step| NonUnitaryEvent {
                step,
                time: times[step],
            })
            .collect()
    } else {
        Vec::new()
    };

    Ok(CoherenceTrajectory {
        dimension: d,
        pairs,
        times,
        populations: vec![populations(sys); steps + 1],
        coherences,
        damping_exponents: damping,
        phase_increments: phases,
        events,
        mu0: clock.mu0(),
    })
}

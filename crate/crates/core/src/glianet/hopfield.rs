//! Quenched description ℋ_int(φ) = −½⟨φ, Jφ⟩ + ℋ₀ with Hebbian couplings and
//! asynchronous sign dynamics.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::GlianetError;

#[derive(Debug, Clone, PartialEq)]
pub struct QuenchedCouplings {
    j: DMatrix<f64>,
    h0: f64,
}

impl QuenchedCouplings {
    /// Requires J = Jᵀ exactly.
    pub fn new(j: DMatrix<f64>, h0: f64) -> Result<Self, GlianetError> {
        if !j.is_square() {
            return Err(GlianetError::ShapeMismatch(format!("J is {}x{}", j.nrows(), j.ncols())));
        }
        if j != j.transpose() {
            return Err(GlianetError::NotSymmetric);
        }
        Ok(Self { j, h0 })
    }

    /// J = (1/n)·Σ ξ(ξ)ᵀ including the diagonal.
    pub fn outer_product(patterns: &[Vec<i8>], h0: f64) -> Result<Self, GlianetError> {
        let n = check_patterns(patterns)?;
        let mut j = DMatrix::zeros(n, n);
        for xi in patterns {
            for a in 0..n {
                for b in 0..n {
                    j[(a, b)] += f64::from(xi[a] * xi[b]);
                }
            }
        }
        Self::new(j / n as f64, h0)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn size(&self) -> usize {
        self.j.nrows()
    }

    pub fn with_h0(mut self, h0: f64) -> Self {
        self.h0 = h0;
        self
    }
}

fn check_patterns(patterns: &[Vec<i8>]) -> Result<usize, GlianetError> {
    let n = patterns
        .first()
        .map(Vec::len)
        .ok_or_else(|| GlianetError::InvalidParameter("need at least one pattern".into()))?;
    if n == 0 || patterns.iter().any(|p| p.len() != n) {
        return Err(GlianetError::ShapeMismatch("patterns must share a nonzero length".into()));
    }
    for &s in patterns.iter().flatten() {
        check_spin(s)?;
    }
    Ok(n)
}

fn check_spin(s: i8) -> Result<(), GlianetError> {
    if s == 1 || s == -1 {
        Ok(())
    } else {
        Err(GlianetError::NotSpinState(s))
    }
}

/// J = (1/n)·Σ ξ(ξ)ᵀ with zero diagonal, ℋ₀ = 0.
pub fn hebbian_couplings(patterns: &[Vec<i8>]) -> Result<QuenchedCouplings, GlianetError> {
    let QuenchedCouplings { mut j, h0 } = QuenchedCouplings::outer_product(patterns, 0.0)?;
    j.fill_diagonal(0.0);
    Ok(QuenchedCouplings { j, h0 })
}

/// −½⟨φ, Jφ⟩ + ℋ₀ for an n-vector state.
pub fn hamiltonian_quenched(phi: &DVector<f64>, jc: &QuenchedCouplings) -> Result<f64, GlianetError> {
    if phi.len() != jc.size() {
        return Err(GlianetError::ShapeMismatch(format!(
            "state has {} components, couplings are {}x{}",
            phi.len(),
            jc.size(),
            jc.size()
        )));
    }
    Ok(-0.5 * phi.dot(&(&jc.j * phi)) + jc.h0)
}

/// s/√n as a unit state.
pub fn spike_pattern(s: &[i8]) -> DVector<f64> {
    let norm = (s.len() as f64).sqrt();
    DVector::from_iterator(s.len(), s.iter().map(|&x| f64::from(x) / norm))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolldownTrajectory {
    /// Initial state followed by the state after every flip.
    pub states: Vec<Vec<i8>>,
    pub energies: Vec<f64>,
    pub updates: usize,
    pub sweeps: usize,
}

impl RolldownTrajectory {
    pub fn final_state(&self) -> &[i8] {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// Asynchronous updates sᵢ ← sign(Σⱼ Jᵢⱼsⱼ) in index order, sign(0) = +1,
/// until a full sweep changes nothing. Energies after the first are
/// accumulated from exact single-flip differences.
pub fn rolldown(
    start: &[i8],
    jc: &QuenchedCouplings,
    max_sweeps: usize,
) -> Result<RolldownTrajectory, GlianetError> {
    if start.len() != jc.size() {
        return Err(GlianetError::ShapeMismatch(format!(
            "start has {} neurons, couplings are for {}",
            start.len(),
            jc.size()
        )));
    }
    for &s in start {
        check_spin(s)?;
    }
    let mut s = start.to_vec();
    let mut traj = RolldownTrajectory {
        states: vec![s.clone()],
        energies: vec![hamiltonian_quenched(&spike_pattern(&s), jc)?],
        updates: 0,
        sweeps: 0,
    };
    let n = s.len() as f64;
    let mut e = traj.energies[0];
    while traj.sweeps < max_sweeps {
        traj.sweeps += 1;
        let mut changed = false;
        for i in 0..s.len() {
            let terms = (0..s.len()).map(|j| jc.j[(i, j)] * f64::from(s[j]));
            let (field, scale) = terms.fold((0.0, 0.0), |(f, a), t: f64| (f + t, a + t.abs()));
            // A field within rounding of zero is a tie.
            let field = if field.abs() <= 1e-12 * scale { 0.0 } else { field };
            let next: i8 = if field >= 0.0 { 1 } else { -1 };
            if next != s[i] {
                // Single-flip change of −½⟨φ, Jφ⟩ with φ = s/√n.
                let jii = jc.j[(i, i)];
                e -= 2.0 * f64::from(next) * (field + jii * f64::from(next)) / n;
                s[i] = next;
                changed = true;
                traj.updates += 1;
                traj.energies.push(e);
                traj.states.push(s.clone());
            }
        }
        if !changed {
            return Ok(traj);
        }
    }
    Err(GlianetError::NotConverged {
        sweeps: max_sweeps,
        last_state: s,
    })
}

/// Glauber dynamics at inverse temperature β: each sweep visits neurons in
/// index order and sets sᵢ = +1 with probability 1/(1 + e^{−2βhᵢ/n}),
/// hᵢ = Σⱼ Jᵢⱼsⱼ. Returns the state after each of `sweeps` sweeps.
pub fn glauber_history<R: Rng + ?Sized>(
    start: &[i8],
    jc: &QuenchedCouplings,
    beta: f64,
    sweeps: usize,
    rng: &mut R,
) -> Result<Vec<Vec<i8>>, GlianetError> {
    if start.len() != jc.size() {
        return Err(GlianetError::ShapeMismatch(format!(
            "start has {} neurons, couplings are for {}",
            start.len(),
            jc.size()
        )));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(GlianetError::InvalidParameter(format!("beta must be non-negative, got {beta}")));
    }
    for &s in start {
        check_spin(s)?;
    }
    let n = start.len() as f64;
    let mut s = start.to_vec();
    let mut history = Vec::with_capacity(sweeps);
    for _ in 0..sweeps {
        for i in 0..s.len() {
            let field: f64 = (0..s.len()).map(|j| jc.j[(i, j)] * f64::from(s[j])).sum();
            let up = 1.0 / (1.0 + (-2.0 * beta * field / n).exp());
            s[i] = if rng.random::<f64>() < up { 1 } else { -1 };
        }
        history.push(s.clone());
    }
    Ok(history)
}

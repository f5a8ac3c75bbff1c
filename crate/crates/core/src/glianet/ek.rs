//! Eguchi–Kawai reduction exp(Δ) → exp(G) checked on quenched partition
//! functions.
//!
//! For each quenched draw of a site-independent G, the full model is sampled
//! uniformly on the unit sphere in n·N dimensions and the single-site model on
//! the sphere in N dimensions. Partition functions are normalized sphere
//! averages, so Z = 1 at β = 0 for both.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::field::random_antisymmetric;
use super::{exp_delta, GlialField, GlianetError};
use crate::numerics::expm;
use crate::numerics::rng::{stream, unit_sphere};

/// Temporal dimensions for which the comparison is defined.
pub const EK_SIZES: [usize; 4] = [4, 8, 16, 32];

/// Starvation threshold: standard error above this fraction of the discrepancy.
const STARVATION_FRACTION: f64 = 0.1;

/// ℋ_red = −(1/2N)·⟨φ, exp(G)φ⟩ + ℋ₀ on a single-site unit N-vector.
pub fn ek_reduced_hamiltonian(phi: &DVector<f64>, g: &DMatrix<f64>, h0: f64) -> Result<f64, GlianetError> {
    let big_n = phi.len();
    if g.nrows() != big_n || g.ncols() != big_n {
        return Err(GlianetError::ShapeMismatch(format!(
            "state has {big_n} components but G is {}x{}",
            g.nrows(),
            g.ncols()
        )));
    }
    let e = expm(g)?;
    Ok(-phi.dot(&(e * phi)) / (2.0 * big_n as f64) + h0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EkDraw {
    /// −ln Z_full/(βn).
    pub free_energy_full: f64,
    /// −ln Z_red/β.
    pub free_energy_reduced: f64,
    pub discrepancy: f64,
    pub standard_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EkSummary {
    pub n: usize,
    pub big_n: usize,
    pub beta: f64,
    pub draws: Vec<EkDraw>,
    pub median_discrepancy: f64,
    pub median_standard_error: f64,
    /// Median standard error exceeds 10% of the median discrepancy.
    pub starved: bool,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Sphere average of exp(β/(2N)·φᵀMφ) for symmetric M, as (ln Z, SE of ln Z).
fn log_partition(
    m: &DMatrix<f64>,
    big_n: usize,
    beta: f64,
    samples: usize,
    rng: &mut impl rand::Rng,
) -> (f64, f64) {
    let dim = m.nrows();
    let coupling = beta / (2.0 * big_n as f64);
    let exponents: Vec<f64> = (0..samples)
        .map(|_| {
            let v = DVector::from_vec(unit_sphere(rng, dim));
            coupling * v.dot(&(m * &v))
        })
        .collect();
    // Shift by the largest exponent before exponentiating.
    let shift = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = exponents.iter().map(|x| (x - shift).exp()).collect();
    let s = samples as f64;
    let mean = w.iter().sum::<f64>() / s;
    let var = w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (s - 1.0);
    (mean.ln() + shift, var.sqrt() / (s.sqrt() * mean))
}

/// Full-versus-reduced free energy per site over `draws` quenched G.
pub fn ek_comparison(
    n: usize,
    big_n: usize,
    beta: f64,
    draws: usize,
    samples: usize,
    seed: u64,
) -> Result<EkSummary, GlianetError> {
    if n < 2 {
        return Err(GlianetError::InvalidParameter(format!("need n ≥ 2 sites, got {n}")));
    }
    if !EK_SIZES.contains(&big_n) {
        return Err(GlianetError::InvalidParameter(format!(
            "N must be one of {EK_SIZES:?}, got {big_n}"
        )));
    }
    if draws == 0 || samples < 2 {
        return Err(GlianetError::InvalidParameter(format!(
            "need at least one draw and two samples, got {draws} and {samples}"
        )));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(GlianetError::InvalidParameter(format!("beta must be non-negative, got {beta}")));
    }
    let scale = 1.0 / (big_n as f64).sqrt();
    let results: Result<Vec<EkDraw>, GlianetError> = (0..draws)
        .into_par_iter()
        .map(|d| {
            let mut rng = stream(seed, ((big_n as u64) << 32) | d as u64);
            let g = random_antisymmetric(&mut rng, big_n, scale);
            if beta == 0.0 {
                return Ok(EkDraw {
                    free_energy_full: 0.0,
                    free_energy_reduced: 0.0,
                    discrepancy: 0.0,
                    standard_error: 0.0,
                });
            }
            let full = exp_delta(&GlialField::replicated(&g, n)?)?;
            let full = (&full + full.transpose()) * 0.5;
            let reduced = expm(&g)?;
            let reduced = (&reduced + reduced.transpose()) * 0.5;
            let (log_full, se_full) = log_partition(&full, big_n, beta, samples, &mut rng);
            let (log_red, se_red) = log_partition(&reduced, big_n, beta, samples, &mut rng);
            let free_energy_full = -log_full / (beta * n as f64);
            let free_energy_reduced = -log_red / beta;
            Ok(EkDraw {
                free_energy_full,
                free_energy_reduced,
                discrepancy: (free_energy_full - free_energy_reduced).abs(),
                standard_error: ((se_full / (beta * n as f64)).powi(2) + (se_red / beta).powi(2)).sqrt(),
            })
        })
        .collect();
    let draws = results?;
    let median_discrepancy = median(draws.iter().map(|d| d.discrepancy).collect());
    let median_standard_error = median(draws.iter().map(|d| d.standard_error).collect());
    Ok(EkSummary {
        n,
        big_n,
        beta,
        starved: median_standard_error > STARVATION_FRACTION * median_discrepancy,
        draws,
        median_discrepancy,
        median_standard_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_hamiltonian_examples() {
        let phi = DVector::from_vec(vec![1.0, 0.0]);
        assert_eq!(ek_reduced_hamiltonian(&phi, &DMatrix::zeros(2, 2), 0.3).unwrap(), -0.25 + 0.3);
        for theta in [0.0, 0.4, 2.0, -1.3] {
            let g = DMatrix::from_row_slice(2, 2, &[0.0, theta, -theta, 0.0]);
            let e = ek_reduced_hamiltonian(&phi, &g, 0.0).unwrap();
            assert!((e + theta.cos() / 4.0).abs() < 1e-14);
        }
        assert!(ek_reduced_hamiltonian(&phi, &DMatrix::zeros(3, 3), 0.0).is_err());
    }

    #[test]
    fn reduced_energy_respects_orthogonal_bound() {
        let mut rng = stream(21, 0);
        for _ in 0..50 {
            let g = random_antisymmetric(&mut rng, 5, 1.5);
            let phi = DVector::from_vec(unit_sphere(&mut rng, 5));
            let e = ek_reduced_hamiltonian(&phi, &g, 0.0).unwrap();
            assert!((-0.1 - 1e-14..=0.1 + 1e-14).contains(&e));
        }
    }

    #[test]
    fn zero_beta_has_no_discrepancy() {
        let s = ek_comparison(3, 4, 0.0, 4, 10, 1).unwrap();
        assert!(s.draws.iter().all(|d| d.discrepancy == 0.0));
        assert_eq!(s.median_discrepancy, 0.0);
    }

    #[test]
    fn seeded_comparison_is_reproducible() {
        let a = ek_comparison(2, 4, 1.0, 3, 500, 7).unwrap();
        let b = ek_comparison(2, 4, 1.0, 3, 500, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.median_discrepancy.is_finite());
    }

    #[test]
    fn preconditions() {
        assert!(ek_comparison(1, 4, 1.0, 1, 10, 0).is_err());
        assert!(ek_comparison(2, 5, 1.0, 1, 10, 0).is_err());
        assert!(ek_comparison(2, 4, -1.0, 1, 10, 0).is_err());
    }
}

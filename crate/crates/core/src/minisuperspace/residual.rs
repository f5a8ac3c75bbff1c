//! What the order-ħ truncation leaves behind in the full constraint.
//!
//! With Φ = Aχ and Ψ = Φe^{iS/ħ},
//! (−ħ²∂ₐ² − U + ℋ_q)Ψ · e^{−iS/ħ}
//!   = −ħ²Φ″ − 2iħS′Φ′ − iħS″Φ + (S′² − U)Φ + ℋ_qΦ.
//! The semiclassical branch cancels every term but −ħ²Φ″, so the relative
//! residual scales as ħ² whenever ℋ_q is itself of order ħ.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use super::clock::{apply_step, check_initial_state, magnus_step};
use super::{
    amplitude_transport, hamilton_jacobi_phase, MiniSuperspaceError, MiniSuperspaceModel,
    PhaseProfile,
};
use crate::numerics::fit_slope;

/// Relative disagreement between the full and half grids above which the
/// finite-difference error is considered dominant.
pub const COARSE_GRID_DISAGREEMENT: f64 = 0.1;

const GAUSS: [f64; 2] = [0.5 - 0.288_675_134_594_812_9, 0.5 + 0.288_675_134_594_812_9];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WdwResidual {
    pub hbar: f64,
    /// RMS residual over interior points relative to RMS |UΨ|.
    pub residual: f64,
    pub half_grid_residual: f64,
    pub coarse: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WdwReport {
    pub entries: Vec<WdwResidual>,
    /// Least-squares slope of ln residual against ln ħ.
    pub slope: Option<f64>,
}

/// χ on the grid from 2iħS′∂ₐχ = ℋ_qχ, one Magnus step per cell.
pub(crate) fn matter_on_grid(
    model: &MiniSuperspaceModel,
    profile: &PhaseProfile,
    chi0: &DVector<Complex64>,
) -> Result<Vec<DVector<Complex64>>, MiniSuperspaceError> {
    check_initial_state(model, chi0)?;
    let generator = |a: f64| -> Result<_, MiniSuperspaceError> {
        let scale = Complex64::new(0.0, -1.0 / (2.0 * model.hbar() * model.phase_gradient(a)?));
        Ok(model.matter_hamiltonian(a)? * scale)
    };
    let mut out = Vec::with_capacity(profile.a_grid.len());
    out.push(chi0.clone());
    for w in profile.a_grid.windows(2) {
        let h = w[1] - w[0];
        let b1 = generator(w[0] + GAUSS[0] * h)?;
        let b2 = generator(w[0] + GAUSS[1] * h)?;
        let next = apply_step(&magnus_step(&b1, &b2, h)?, out.last().expect("seeded"))?;
        out.push(next);
    }
    Ok(out)
}

/// Relative residual using every `stride`-th grid point.
fn residual_on(
    model: &MiniSuperspaceModel,
    profile: &PhaseProfile,
    phi: &[DVector<Complex64>],
    stride: usize,
) -> Result<f64, MiniSuperspaceError> {
    let idx: Vec<usize> = (0..profile.a_grid.len()).step_by(stride).collect();
    let m = idx.len();
    if m < 5 {
        return Err(MiniSuperspaceError::InvalidParameter(format!(
            "grid of {m} points is too small for fourth-order differences"
        )));
    }
    let h = profile.a_grid[idx[1]] - profile.a_grid[idx[0]];
    let hbar = model.hbar();
    let i_hbar = Complex64::new(0.0, hbar);
    let c = |x: f64| Complex64::new(x, 0.0);
    let (mut num, mut den) = (0.0, 0.0);
    for j in 2..m - 2 {
        let p = |k: isize| &phi[idx[(j as isize + k) as usize]];
        let sp = |k: isize| profile.s_prime[idx[(j as isize + k) as usize]];
        let d1 = (p(-2) - p(-1) * c(8.0) + p(1) * c(8.0) - p(2)) * c(1.0 / (12.0 * h));
        let d2 = (-p(-2) + p(-1) * c(16.0) - p(0) * c(30.0) + p(1) * c(16.0) - p(2))
            * c(1.0 / (12.0 * h * h));
        let s2 = (sp(-2) - 8.0 * sp(-1) + 8.0 * sp(1) - sp(2)) / (12.0 * h);
        let a = profile.a_grid[idx[j]];
        let u = model.potential(a);
        let s1 = sp(0);
        let r = d2 * c(-hbar * hbar) - d1 * (i_hbar * 2.0 * s1) - p(0) * (i_hbar * s2)
            + p(0) * c(s1 * s1 - u)
            + model.matter_hamiltonian(a)? * p(0);
        num += r.norm_squared();
        den += u * u * p(0).norm_squared();
    }
    Ok(if den > 0.0 { (num / den).sqrt() } else { num.sqrt() })
}

/// Builds the branch on `points` grid samples for each ħ and measures the
/// relative residual, flagging grids whose half-resolution answer differs by
/// more than 10%.
pub fn wdw_residual(
    model: &MiniSuperspaceModel,
    a_range: (f64, f64),
    points: usize,
    chi0: &DVector<Complex64>,
    hbar_list: &[f64],
) -> Result<WdwReport, MiniSuperspaceError> {
    let entries = hbar_list
        .par_iter()
        .map(|&hbar| {
            let m = model.clone().with_hbar(hbar)?;
            let profile = hamilton_jacobi_phase(&m, a_range.0, a_range.1, points)?;
            let amplitude = amplitude_transport(&profile)?;
            let chi = matter_on_grid(&m, &profile, chi0)?;
            let phi: Vec<DVector<Complex64>> = chi
                .iter()
                .zip(&amplitude)
                .map(|(x, &amp)| x * Complex64::new(amp, 0.0))
                .collect();
            let residual = residual_on(&m, &profile, &phi, 1)?;
            let half_grid_residual = residual_on(&m, &profile, &phi, 2)?;
            let coarse = residual > 0.0
                && ((half_grid_residual - residual) / residual).abs() > COARSE_GRID_DISAGREEMENT;
            if coarse {
                log::warn!("ħ = {hbar}: finite-difference error dominates the residual");
            }
            Ok(WdwResidual {
                hbar,
                residual,
                half_grid_residual,
                coarse,
            })
        })
        .collect::<Result<Vec<_>, MiniSuperspaceError>>()?;
    let slope = (entries.len() >= 2 && entries.iter().all(|e| e.residual > 0.0)).then(|| {
        let x: Vec<f64> = entries.iter().map(|e| e.hbar.ln()).collect();
        let y: Vec<f64> = entries.iter().map(|e| e.residual.ln()).collect();
        fit_slope(&x, &y)
    });
    Ok(WdwReport { entries, slope })
}

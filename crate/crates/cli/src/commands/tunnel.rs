//! `tunnel`: barrier exponent and transmission by closed form, quadrature,
//! WKB current ratio and, optionally, the transfer-matrix oracle.

use qobs_core::oracle::{cap_barrier, default_cap, transfer_matrix_transmission};
use qobs_core::wkb::{
    activation_rate, activation_rate_quadrature, barrier_exponent_closed_form, current_ratio,
    BarrierProblem, WkbSolution,
};

use crate::config::{key, Key, Params};
use crate::error::{CliError, Result};
use crate::sweep::{parse_axes, run_sweep};
use crate::table::{int, real, Column, ResultTable};

pub const KEYS: &[Key] = &[
    key("hbar", "1"),
    key("mu", "1"),
    key("j0", "1"),
    key("h0", "1"),
    key("oracle", "false"),
    key("cap", "auto"),
    key("points", "20000"),
    key("sweep", ""),
    key("seed", "0"),
];

pub fn columns(oracle: bool) -> Vec<Column> {
    let mut c = vec![
        real("hbar"),
        real("mu"),
        real("j0"),
        real("h0"),
        real("lambda"),
        real("T_closed"),
        real("T_quadrature"),
        real("T_current_ratio"),
    ];
    if oracle {
        c.extend([real("T_numeric"), real("richardson_error"), real("L"), int("n")]);
    }
    c
}

pub fn row(p: &Params) -> Result<Vec<f64>> {
    let bp = BarrierProblem::new(p.f64("hbar")?, p.f64("mu")?, p.f64("j0")?, p.f64("h0")?)?;
    let ratio = current_ratio(&WkbSolution::new(&bp))?;
    let mut r = vec![
        bp.hbar,
        bp.mu_phi,
        bp.j0,
        bp.h0,
        barrier_exponent_closed_form(&bp),
        activation_rate(&bp),
        activation_rate_quadrature(&bp)?,
        ratio.ratio,
    ];
    if p.bool("oracle")? {
        let l = match p.str("cap") {
            "auto" => default_cap(&bp),
            _ => p.f64("cap")?,
        };
        let n = p.usize("points")?;
        let pot = cap_barrier(&bp, l, n)?;
        let est = transfer_matrix_transmission(&pot, 0.0, bp.hbar, bp.mu_phi)?;
        r.extend([est.t_numeric, est.richardson_error, l, n as f64]);
    }
    Ok(r)
}

pub fn run(p: &Params) -> Result<ResultTable> {
    let oracle = p.bool("oracle")?;
    let spec = p.str("sweep").trim();
    if spec.is_empty() {
        let mut t = ResultTable::new("tunnel", columns(oracle));
        t.push(row(p)?);
        return Ok(t);
    }
    let axes = parse_axes(spec)?;
    if let Some(a) = axes.iter().find(|a| !["hbar", "mu", "j0", "h0"].contains(&a.key.as_str())) {
        return Err(CliError::Validation(format!(
            "tunnel sweeps take hbar, mu, j0 or h0, got '{}'",
            a.key
        )));
    }
    run_sweep("tunnel", p, &axes, columns(oracle), row)
}

//! `cosmo`: semiclassical mini-superspace branch, matter evolution along the
//! scale-factor clock, and the residual of the full constraint.

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qobs_core::minisuperspace::{
    amplitude_transport, evolve_matter, hamilton_jacobi_defect, hamilton_jacobi_phase,
    transport_residual, wdw_residual, MatterScaling, MiniSuperspaceModel,
};
use qobs_core::numerics::linspace;

use crate::config::{key, Key, Params};
use crate::error::{CliError, Result};
use crate::table::{int, real, Column, ResultTable};

pub const KEYS: &[Key] = &[
    key("potential", "quadratic:4"),
    key("hbar-list", "0.1,0.05,0.025"),
    key("a0", "1"),
    key("a-max", "2"),
    key("t-max", "0.1"),
    key("outputs", "101"),
    key("points", "1001"),
    key("matter", "twolevel:1"),
    key("matter-scaling", "hbar"),
    key("substeps", "8"),
    key("seed", "0"),
];

/// Rows of numbers from a comma- or whitespace-separated file, `#` comments
/// allowed, sorted by the first column.
fn read_rows(path: &Path, width: usize) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .filter(|r| r.len() == width)
            .ok_or_else(|| {
                CliError::Validation(format!(
                    "{}:{}: expected {width} finite numbers",
                    path.display(),
                    i + 1
                ))
            })?;
        rows.push(row);
    }
    rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
    if rows.len() < 2 || rows.windows(2).any(|w| w[0][0] == w[1][0]) {
        return Err(CliError::Validation(format!(
            "{}: need at least two rows with distinct a",
            path.display()
        )));
    }
    Ok(rows)
}

/// Piecewise-linear interpolation of column `col`; NaN outside the table.
fn interpolate(rows: &[Vec<f64>], col: usize, a: f64) -> f64 {
    let i = rows.partition_point(|r| r[0] <= a);
    if i == 0 || (i == rows.len() && a > rows[rows.len() - 1][0]) {
        return f64::NAN;
    }
    if i == rows.len() {
        return rows[i - 1][col];
    }
    let (l, r) = (&rows[i - 1], &rows[i]);
    let w = (a - l[0]) / (r[0] - l[0]);
    l[col] + w * (r[col] - l[col])
}

fn covers(rows: &[Vec<f64>], lo: f64, hi: f64, what: &str) -> Result<()> {
    if rows[0][0] <= lo && rows[rows.len() - 1][0] >= hi {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "{what} table covers [{}, {}], run needs [{lo}, {hi}]",
            rows[0][0],
            rows[rows.len() - 1][0]
        )))
    }
}

type Potential = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `quadratic:c` (U = c·a²), `constant:c` (U = c) or `table:FILE` (a, U).
fn potential(spec: &str, range: (f64, f64)) -> Result<Potential> {
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Validation(format!("potential: expected kind:value, got {spec:?}")))?;
    let number = || {
        arg.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::Validation(format!("potential: not a number: {arg:?}")))
    };
    Ok(match kind {
        "quadratic" => {
            let c = number()?;
            Arc::new(move |a: f64| c * a * a)
        }
        "constant" => {
            let c = number()?;
            Arc::new(move |_| c)
        }
        "table" => {
            let rows = read_rows(Path::new(arg), 2)?;
            covers(&rows, range.0, range.1, "potential")?;
            Arc::new(move |a| interpolate(&rows, 1, a))
        }
        _ => {
            return Err(CliError::Validation(format!(
                "potential kind must be quadratic, constant or table, got {kind:?}"
            )))
        }
    })
}

type Matter = Arc<dyn Fn(f64) -> DMatrix<Complex64> + Send + Sync>;

/// `none`, `twolevel:ω` (ℋ_q = ω(a·σz + σx)) or `file:FILE` with rows
/// (a, h00, h11, Re h01, Im h01).
fn matter(spec: &str, range: (f64, f64)) -> Result<Option<Matter>> {
    if spec == "none" {
        return Ok(None);
    }
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Validation(format!("matter: expected kind:value, got {spec:?}")))?;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    Ok(Some(match kind {
        "twolevel" => {
            let w: f64 = arg
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| CliError::Validation(format!("matter: not a number: {arg:?}")))?;
            Arc::new(move |a: f64| {
                DMatrix::from_row_slice(2, 2, &[c(w * a, 0.0), c(w, 0.0), c(w, 0.0), c(-w * a, 0.0)])
            })
        }
        "file" => {
            let rows = read_rows(Path::new(arg), 5)?;
            covers(&rows, range.0, range.1, "matter")?;
            Arc::new(move |a: f64| {
                let v = |col| interpolate(&rows, col, a);
                let off = c(v(3), v(4));
                DMatrix::from_row_slice(2, 2, &[c(v(1), 0.0), off, off.conj(), c(v(2), 0.0)])
            })
        }
        _ => {
            return Err(CliError::Validation(format!(
                "matter kind must be none, twolevel or file, got {kind:?}"
            )))
        }
    }))
}

fn model(p: &Params, hbar: f64) -> Result<(MiniSuperspaceModel, DVector<Complex64>)> {
    let range = (p.f64("a0")?, p.f64("a-max")?);
    if !(range.0 < range.1) {
        return Err(CliError::Validation(format!(
            "need a0 < a-max, got {} and {}",
            range.0, range.1
        )));
    }
    let u = potential(p.str("potential"), range)?;
    let base = MiniSuperspaceModel::new(move |a| u(a), hbar)?;
    let scaling = match p.str("matter-scaling") {
        "hbar" => MatterScaling::ProportionalToHbar,
        "fixed" => MatterScaling::Fixed,
        other => {
            return Err(CliError::Validation(format!(
                "matter-scaling must be hbar or fixed, got {other:?}"
            )))
        }
    };
    Ok(match matter(p.str("matter"), range)? {
        None => (base, DVector::from_element(1, Complex64::new(1.0, 0.0))),
        Some(h) => (
            base.with_matter(2, move |a| h(a), scaling),
            DVector::from_element(2, Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)),
        ),
    })
}

fn trajectory_columns(dim: usize) -> Vec<Column> {
    let mut c = vec![real("t"), real("a")];
    c.extend((0..dim).map(|k| real(format!("re_chi{k}"))));
    c.extend((0..dim).map(|k| real(format!("im_chi{k}"))));
    c.push(real("norm"));
    c
}

pub fn run(p: &Params) -> Result<Vec<ResultTable>> {
    let hbars = p.f64_list("hbar-list")?;
    let (a0, a_max) = (p.f64("a0")?, p.f64("a-max")?);
    let t_max = p.f64("t-max")?;
    let outputs = p.usize("outputs")?;
    let points = p.usize("points")?;
    if !(t_max > 0.0 && t_max.is_finite()) || outputs < 2 {
        return Err(CliError::Validation(format!(
            "need t-max > 0 and outputs ≥ 2, got {t_max} and {outputs}"
        )));
    }
    let (m, chi0) = model(p, hbars[0])?;
    let times = linspace(0.0, t_max, outputs);
    let traj = evolve_matter(&m, a0, (a0, a_max), 0.0, &times, &chi0, p.usize("substeps")?)?;
    let mut path = ResultTable::new("cosmo", trajectory_columns(chi0.len()));
    for ((t, a), chi) in traj.times.iter().zip(&traj.a).zip(&traj.chi) {
        let mut r = vec![*t, *a];
        r.extend(chi.iter().map(|z| z.re));
        r.extend(chi.iter().map(|z| z.im));
        r.push(chi.norm());
        path.push(r);
    }

    let report = wdw_residual(&m, (a0, a_max), points, &chi0, &hbars)?;
    let slope = report.slope.unwrap_or(f64::NAN);
    let mut residual = ResultTable::new(
        "cosmo_residual",
        vec![real("hbar"), real("residual"), real("half_grid_residual"), int("coarse"), real("slope")],
    );
    for e in &report.entries {
        residual.push(vec![
            e.hbar,
            e.residual,
            e.half_grid_residual,
            f64::from(u8::from(e.coarse)),
            slope,
        ]);
    }

    let profile = hamilton_jacobi_phase(&m, a0, a_max, points)?;
    let amp = amplitude_transport(&profile)?;
    let flux0 = amp[0] * amp[0] * profile.s_prime[0];
    let conservation = amp
        .iter()
        .zip(&profile.s_prime)
        .map(|(x, d)| (x * x * d / flux0 - 1.0).abs())
        .fold(0.0, f64::max);
    let mut checks = ResultTable::new(
        "cosmo_checks",
        vec![
            real("hj_defect"),
            real("amplitude_conservation"),
            real("transport_residual"),
            real("norm_drift"),
            int("truncated"),
        ],
    );
    checks.push(vec![
        hamilton_jacobi_defect(&m, &profile)?,
        conservation,
        transport_residual(&profile, &amp)?,
        traj.max_norm_drift,
        f64::from(u8::from(traj.truncated)),
    ]);
    Ok(vec![path, residual, checks])
}

//! Parameter sweeps over one or two `key=lo:hi:n` axes.

use rayon::prelude::*;

use crate::config::Params;
use crate::error::{CliError, Result};
use crate::table::{real, Column, ResultTable};

pub const MAX_AXES: usize = 2;
pub const MAX_AXIS_POINTS: usize = 200;
pub const MAX_SWEEP_POINTS: usize = 40_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<f64>,
}

impl Axis {
    /// `key=lo:hi:n`, n evenly spaced values including both ends.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |why: &str| CliError::Validation(format!("axis {spec:?}: {why}"));
        let (key, range) = spec.split_once('=').ok_or_else(|| bad("expected key=lo:hi:n"))?;
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 || key.trim().is_empty() {
            return Err(bad("expected key=lo:hi:n"));
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad("lo is not a number"))?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad("hi is not a number"))?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad("n is not a positive integer"))?;
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(bad("bounds must be finite"));
        }
        if n == 0 || n > MAX_AXIS_POINTS {
            return Err(bad(&format!("n must lie in 1..={MAX_AXIS_POINTS}")));
        }
        if n == 1 && lo != hi {
            return Err(bad("a single point needs lo = hi"));
        }
        let values = if n == 1 {
            vec![lo]
        } else {
            qobs_core::numerics::linspace(lo, hi, n)
        };
        Ok(Self {
            key: key.trim().to_string(),
            values,
        })
    }
}

/// Whitespace-separated axis specs.
pub fn parse_axes(specs: &str) -> Result<Vec<Axis>> {
    let axes: Vec<Axis> = specs.split_whitespace().map(Axis::parse).collect::<Result<_>>()?;
    if axes.is_empty() || axes.len() > MAX_AXES {
        return Err(CliError::Validation(format!(
            "a sweep takes 1 to {MAX_AXES} axes, got {}",
            axes.len()
        )));
    }
    if axes.len() == 2 && axes[0].key == axes[1].key {
        return Err(CliError::Validation(format!("axis {} given twice", axes[0].key)));
    }
    let total: usize = axes.iter().map(|a| a.values.len()).product();
    if total > MAX_SWEEP_POINTS {
        return Err(CliError::Validation(format!(
            "sweep has {total} points, limit is {MAX_SWEEP_POINTS}"
        )));
    }
    Ok(axes)
}

/// Cartesian product, last axis fastest.
pub fn grid(axes: &[Axis]) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    points
}

/// Evaluates `row` at every grid point in parallel. Axis columns are
/// prepended unless the row already reports that key.
pub fn run_sweep<F>(name: &str, base: &Params, axes: &[Axis], columns: Vec<Column>, row: F) -> Result<ResultTable>
where
    F: Fn(&Params) -> Result<Vec<f64>> + Sync,
{
    for axis in axes {
        if !base.contains(&axis.key) {
            return Err(CliError::Validation(format!(
                "cannot sweep '{}': not a parameter of {}",
                axis.key,
                base.command()
            )));
        }
    }
    let extra: Vec<&Axis> = axes
        .iter()
        .filter(|a| !columns.iter().any(|c| c.name == a.key))
        .collect();
    let rows = grid(axes)
        .par_iter()
        .map(|point| {
            let mut p = base.clone();
            for (axis, &v) in axes.iter().zip(point) {
                p.set(&axis.key, v.to_string())?;
            }
            let mut r: Vec<f64> = axes
                .iter()
                .zip(point)
                .filter(|(a, _)| extra.iter().any(|e| e.key == a.key))
                .map(|(_, &v)| v)
                .collect();
            r.extend(row(&p)?);
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut all_columns: Vec<Column> = extra.iter().map(|a| real(a.key.clone())).collect();
    all_columns.extend(columns);
    let mut table = ResultTable::new(name, all_columns);
    for r in rows {
        table.push(r);
    }
    Ok(table)
}

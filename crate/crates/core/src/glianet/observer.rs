//! The observer descriptor (τ, H, J): retention time, entropy rate and
//! couplings of one configured run.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::{entropy_rate, GlianetError, QuenchedCouplings};
use crate::clock::QuantumClassRecord;

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverTriple {
    /// Physical retention time; infinite when the threshold was never reached.
    pub tau: f64,
    /// Zero-retention record (threshold crossed on the first step).
    pub trivial: bool,
    /// Entropy rate in bits per step.
    pub entropy_h: f64,
    pub couplings: QuenchedCouplings,
    /// Run average of φᵢ = sᵢ/√n over neurons and steps.
    pub order_parameter: f64,
}

pub fn observer_triple(
    record: &QuantumClassRecord,
    spike_history: &[Vec<i8>],
    window: usize,
    jc: &QuenchedCouplings,
) -> Result<ObserverTriple, GlianetError> {
    if spike_history.is_empty() {
        return Err(GlianetError::MissingComponent("spike history is empty".into()));
    }
    let n = spike_history[0].len();
    if n != jc.size() {
        return Err(GlianetError::MissingComponent(format!(
            "couplings are for {} neurons but the history has {n}",
            jc.size()
        )));
    }
    let entropy = entropy_rate(spike_history, window)?;
    let scale = 1.0 / (n as f64).sqrt();
    let total: f64 = spike_history.iter().flatten().map(|&s| f64::from(s) * scale).sum();
    Ok(ObserverTriple {
        tau: record.retention_time(),
        trivial: record.is_trivial(),
        entropy_h: entropy.bits_per_step,
        couplings: jc.clone(),
        order_parameter: total / (spike_history.len() * n) as f64,
    })
}

fn parse_f64(key: &str, value: &str) -> Result<f64, GlianetError> {
    value
        .parse()
        .map_err(|_| GlianetError::Parse(format!("{key}: not a number: {value}")))
}

impl ObserverTriple {
    /// `key=value` lines with 17 significant digits; `j` is row-major.
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        let j = self.couplings.matrix();
        let _ = writeln!(out, "tau={:.16e}", self.tau);
        let _ = writeln!(out, "trivial={}", self.trivial);
        let _ = writeln!(out, "entropy_h={:.16e}", self.entropy_h);
        let _ = writeln!(out, "order_parameter={:.16e}", self.order_parameter);
        let _ = writeln!(out, "h0={:.16e}", self.couplings.h0());
        let _ = writeln!(out, "n={}", j.nrows());
        let entries: Vec<String> = j.transpose().iter().map(|x| format!("{x:.16e}")).collect();
        let _ = writeln!(out, "j={}", entries.join(","));
        out
    }

    pub fn from_record(text: &str) -> Result<Self, GlianetError> {
        let mut fields = BTreeMap::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| GlianetError::Parse(format!("missing '=' in {line:?}")))?;
            fields.insert(k.trim(), v.trim());
        }
        let get = |key: &str| {
            fields
                .get(key)
                .copied()
                .ok_or_else(|| GlianetError::MissingComponent(key.to_string()))
        };
        let n: usize = get("n")?
            .parse()
            .map_err(|_| GlianetError::Parse("n: not an integer".into()))?;
        let entries = get("j")?
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| parse_f64("j", s))
            .collect::<Result<Vec<_>, _>>()?;
        if entries.len() != n * n {
            return Err(GlianetError::Parse(format!("j has {} entries, expected {}", entries.len(), n * n)));
        }
        let trivial = match get("trivial")? {
            "true" => true,
            "false" => false,
            other => return Err(GlianetError::Parse(format!("trivial: {other}"))),
        };
        Ok(Self {
            tau: parse_f64("tau", get("tau")?)?,
            trivial,
            entropy_h: parse_f64("entropy_h", get("entropy_h")?)?,
            order_parameter: parse_f64("order_parameter", get("order_parameter")?)?,
            couplings: QuenchedCouplings::new(
                DMatrix::from_row_slice(n, n, &entries),
                parse_f64("h0", get("h0")?)?,
            )?,
        })
    }
}

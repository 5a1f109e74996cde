use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{Operator, QuantumState, StateVector};

/// Named operator sampled along a trajectory. Hermitian operators give one
/// real column; others give `<name>_re` and `<name>_im`.
#[derive(Debug, Clone)]
pub struct Observable {
    pub name: String,
    pub op: Operator,
    hermitian: bool,
}

impl Observable {
    pub fn new<S: Into<String>>(name: S, op: Operator) -> Self {
        let hermitian = op.is_hermitian();
        Self { name: name.into(), op, hermitian }
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn column_names(&self) -> Vec<String> {
        if self.hermitian {
            vec![self.name.clone()]
        } else {
            vec![format!("{}_re", self.name), format!("{}_im", self.name)]
        }
    }

    pub(crate) fn sample_into<S: QuantumState>(&self, state: &S, out: &mut Vec<f64>) -> Result<()> {
        let v = state.expect(&self.op)?;
        out.push(v.re);
        if !self.hermitian {
            out.push(v.im);
        }
        Ok(())
    }
}

pub(crate) fn column_names(observables: &[Observable]) -> Vec<String> {
    observables.iter().flat_map(Observable::column_names).collect()
}

/// Samples every observable on one state, in column order.
pub(crate) fn sample_all<S: QuantumState>(observables: &[Observable], state: &S) -> Result<Vec<f64>> {
    let mut row = Vec::with_capacity(observables.len() * 2);
    for o in observables {
        o.sample_into(state, &mut row)?;
    }
    Ok(row)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
    /// Per-point standard error of an ensemble mean.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub columns: Vec<Column>,
    /// Number of trajectories averaged, for ensemble results.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_traj: Option<usize>,
}

impl TimeSeries {
    /// Builds a series from row-major samples (one row per time).
    pub(crate) fn from_rows(times: Vec<f64>, names: Vec<String>, rows: &[Vec<f64>]) -> Self {
        let columns = names
            .into_iter()
            .enumerate()
            .map(|(j, name)| Column { name, values: rows.iter().map(|r| r[j]).collect(), stderr: None })
            .collect();
        Self { times, columns, n_traj: None }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column(&self, name: &str) -> Result<&Column> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    pub fn values(&self, name: &str) -> Result<&[f64]> {
        Ok(&self.column(name)?.values)
    }

    pub fn last(&self, name: &str) -> Result<f64> {
        self.values(name)?
            .last()
            .copied()
            .ok_or_else(|| Error::InvalidState("empty time series".into()))
    }

    pub fn has_stderr(&self) -> bool {
        self.columns.iter().any(|c| c.stderr.is_some())
    }

    /// CSV with header `t,<columns>[,<column>_stderr...]` and `\n` line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for c in &self.columns {
            out.push(',');
            out.push_str(&c.name);
        }
        let with_err: Vec<&Column> = self.columns.iter().filter(|c| c.stderr.is_some()).collect();
        for c in &with_err {
            let _ = write!(out, ",{}_stderr", c.name);
        }
        out.push('\n');
        for (i, t) in self.times.iter().enumerate() {
            out.push_str(&format_number(*t));
            for c in &self.columns {
                out.push(',');
                out.push_str(&format_number(c.values[i]));
            }
            for c in &with_err {
                out.push(',');
                out.push_str(&format_number(c.stderr.as_ref().map_or(0.0, |e| e[i])));
            }
            out.push('\n');
        }
        out
    }

    /// Largest pointwise `|a − b|` over the named columns of two series on the same grid.
    pub fn max_deviation(&self, other: &TimeSeries, names: &[&str]) -> Result<f64> {
        if self.times.len() != other.times.len() {
            return Err(Error::Dimension(format!(
                "series lengths differ: {} vs {}",
                self.times.len(),
                other.times.len()
            )));
        }
        let mut worst: f64 = 0.0;
        for name in names {
            let (a, b) = (self.values(name)?, other.values(name)?);
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x - y).abs());
            }
        }
        Ok(worst)
    }
}

/// Shortest round-trip decimal; exponent form only for very small or large magnitudes.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Jumps and end state of one quantum trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    /// `(time, channel index)` in the order they happened.
    pub jump_events: Vec<(f64, usize)>,
    pub final_state: StateVector,
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::Operator;
use crate::model::Channel;

/// Fraction of the fastest model frequency allowed per integration step.
pub const STEP_SAFETY: f64 = 0.02;

/// Uniform output grid plus an optional integration step ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_max: Option<f64>,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_samples: usize) -> Result<Self> {
        let grid = Self { t_start, t_end, n_samples, dt_max: None };
        grid.validate()?;
        Ok(grid)
    }

    pub fn with_dt_max(mut self, dt_max: f64) -> Result<Self> {
        self.dt_max = Some(dt_max);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_end > self.t_start) {
            return Err(Error::InvalidParameter(format!(
                "time grid needs t_end > t_start, got [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        if self.n_samples < 2 {
            return Err(Error::InvalidParameter("time grid needs at least 2 samples".into()));
        }
        if let Some(dt) = self.dt_max {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::InvalidParameter(format!("dt_max must be positive, got {dt}")));
            }
        }
        Ok(())
    }

    pub fn interval(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_samples - 1) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        let h = self.interval();
        (0..self.n_samples)
            .map(|k| if k + 1 == self.n_samples { self.t_end } else { self.t_start + k as f64 * h })
            .collect()
    }

    /// Largest admissible step for a model whose fastest frequency is `omega_max`.
    pub fn step_bound(omega_max: f64) -> f64 {
        if omega_max > 0.0 {
            STEP_SAFETY / omega_max
        } else {
            f64::INFINITY
        }
    }

    /// Integration step: the sample interval split into equal steps no longer
    /// than `dt_max` (or the frequency bound when unset). Returns
    /// `(steps per interval, step)`.
    pub fn resolve_step(&self, omega_max: f64) -> Result<(u64, f64)> {
        self.validate()?;
        let bound = Self::step_bound(omega_max);
        let ceiling = match self.dt_max {
            Some(dt) if dt > bound * (1.0 + 1e-12) => {
                return Err(Error::InvalidParameter(format!(
                    "dt_max {dt} exceeds the stability ceiling {bound:e} = {STEP_SAFETY}/omega_max"
                )))
            }
            Some(dt) => dt,
            None => bound,
        };
        let interval = self.interval();
        let steps = if ceiling.is_finite() { (interval / ceiling).ceil().max(1.0) } else { 1.0 };
        if steps > 1e15 {
            return Err(Error::InvalidParameter(format!("{steps:e} steps per sample interval")));
        }
        Ok((steps as u64, interval / steps))
    }
}

/// Fastest frequency present in a model: the largest `|H_ij|` or the largest
/// total decay rate `2Σ r·|(C†C)_ij|`, whichever is bigger.
pub fn max_frequency(h: &Operator, channels: &[Channel]) -> f64 {
    let decay: f64 = channels
        .iter()
        .filter(|c| c.is_active())
        .map(|c| {
            let cdc = c.op.matrix().adjoint() * c.op.matrix();
            2.0 * c.rate * cdc.iter().map(|z| z.norm()).fold(0.0, f64::max)
        })
        .sum();
    h.max_abs().max(decay)
}

//! JSON scenario configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::units::PhysicalParams;
use super::CliError;
use crate::analysis::{SweepAxis, SweepField};
use crate::hilbert::C64;
use crate::model::{ModelKind, SystemParams};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// `|10⟩` evolved to `ξτ = π/4`; reports the EPR fidelity.
    Entangle,
    /// `(α|0⟩ + β|1⟩)₁|0⟩₂` evolved to `ξt_f = π/2`, then the `U` gate.
    Transfer,
    /// Transfer fidelity over a grid of loss rates.
    Fig3Sweep,
    /// Effective rates and the strong-coupling flag over a parameter grid.
    RegimeMap,
    /// Two model tiers on the same parameters.
    TierCompare,
    /// Single-emitter and single-photon decay against their closed forms.
    DecayCheck,
}

impl ScenarioKind {
    pub fn is_sweep(self) -> bool {
        matches!(self, ScenarioKind::Fig3Sweep | ScenarioKind::RegimeMap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ParamsSpec {
    Dimensionless(SystemParams),
    Physical(PhysicalParams),
}

impl ParamsSpec {
    pub fn resolve(&self) -> Result<SystemParams, CliError> {
        let p = match self {
            ParamsSpec::Dimensionless(p) => *p,
            ParamsSpec::Physical(phys) => phys.to_dimensionless()?,
        };
        p.validate()?;
        Ok(p)
    }
}

/// Complex number written as `[re, im]`.
pub type ComplexPair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Amplitudes { alpha: ComplexPair, beta: ComplexPair },
    Named { named: String },
}

impl InitialState {
    pub fn amplitudes(&self) -> Option<(C64, C64)> {
        match self {
            InitialState::Amplitudes { alpha, beta } => Some((C64::new(alpha[0], alpha[1]), C64::new(beta[0], beta[1]))),
            InitialState::Named { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub t_start: f64,
    /// Defaults to the scenario's natural end time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_max: Option<f64>,
}

fn default_samples() -> usize {
    201
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { t_start: 0.0, t_end: None, n_samples: default_samples(), dt_max: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolverSpec {
    #[default]
    Master,
    Mcwf {
        n_traj: usize,
        #[serde(default)]
        seed0: u64,
    },
    Unitary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub field: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axes: Vec<AxisSpec>,
}

impl SweepSpec {
    pub fn resolve(&self) -> Result<Vec<SweepAxis>, CliError> {
        self.axes
            .iter()
            .map(|a| Ok(SweepAxis::new(a.field.parse::<SweepField>()?, a.values.clone())?))
            .collect()
    }

    /// κ and γ each scaled by {1, 10, 100, 1000}.
    pub fn default_rates() -> Self {
        let values = vec![1.0, 10.0, 100.0, 1000.0];
        Self {
            axes: vec![
                AxisSpec { field: "kappa_scale".into(), values: values.clone() },
                AxisSpec { field: "gamma_scale".into(), values },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub scenario: ScenarioKind,
    #[serde(default = "default_model")]
    pub model: ModelKind,
    pub params: ParamsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialState>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    /// Output path prefix; relative prefixes resolve against the output directory.
    pub output: String,
    /// Second tier for `tier_compare`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare_with: Option<ModelKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

fn default_model() -> ModelKind {
    ModelKind::NineLevel
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Schema and cross-field checks; no simulation.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.output.trim().is_empty() {
            return Err(CliError::Config("output prefix is empty".into()));
        }
        let p = self.params.resolve()?;
        match self.solver {
            SolverSpec::Unitary if !p.is_lossless() => {
                return Err(CliError::Config("the unitary solver needs all loss rates set to zero".into()))
            }
            SolverSpec::Mcwf { n_traj: 0, .. } => return Err(CliError::Config("mcwf needs n_traj >= 1".into())),
            _ => {}
        }
        if let Some(t_end) = self.grid.t_end {
            crate::dynamics::TimeGrid { t_start: self.grid.t_start, t_end, n_samples: self.grid.n_samples, dt_max: self.grid.dt_max }
                .validate()?;
        } else if self.grid.n_samples < 2 {
            return Err(CliError::Config("grid needs at least 2 samples".into()));
        }
        if let Some(state) = &self.initial_state {
            if let Some((a, b)) = state.amplitudes() {
                crate::analysis::transfer_input(a, b)?;
            }
        }
        match self.scenario {
            ScenarioKind::TierCompare if self.compare_with.is_none() => {
                return Err(CliError::Config("tier_compare needs `compare_with`".into()))
            }
            ScenarioKind::RegimeMap if self.sweep.is_none() => {
                return Err(CliError::Config("regime_map needs `sweep.axes`".into()))
            }
            _ => {}
        }
        if let Some(s) = &self.sweep {
            s.resolve()?;
        }
        Ok(())
    }
}

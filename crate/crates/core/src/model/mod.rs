//! Model hierarchy: full cavity → nine-level → dressed Λ → effective Raman.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

mod channels;
mod hamiltonian;
mod params;
mod system;

pub use channels::{build_collapse_ops, Channel};
pub use hamiltonian::{
    annihilation, build_dressed_lambda_h, build_effective_raman_h, build_full_cavity_h, build_nine_level_h,
    build_nine_level_h_dressed, dressed_space, dressed_to_product, emitter_pair_space, from_dressed_basis,
    full_cavity_space, lambda_sink_space, lambda_space, pair_embedding, pair_state, raman_sink_space, raman_space,
    sigma, to_dressed_basis, CAVITY, DRESSED_LABELS, LAMBDA_LABELS, LAMBDA_SINK_LABELS, NV1, NV2, RAMAN_LABELS,
    RAMAN_SINK_LABELS,
};
pub use params::{effective_rates, theta, xi, Advisory, EffectiveRates, StarkCompensation, SystemParams};
pub use system::{pair_density, pair_projector, ModelSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    FullCavity,
    NineLevel,
    DressedLambda,
    EffectiveRaman,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::FullCavity,
        ModelKind::NineLevel,
        ModelKind::DressedLambda,
        ModelKind::EffectiveRaman,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::FullCavity => "full_cavity",
            ModelKind::NineLevel => "nine_level",
            ModelKind::DressedLambda => "dressed_lambda",
            ModelKind::EffectiveRaman => "effective_raman",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown model kind `{s}`")))
    }
}

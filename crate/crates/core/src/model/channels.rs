//! Collapse channels of the master equation.
//!
//! A channel `(r, C)` contributes `r(2CρC† − C†Cρ − ρC†C)`, so a lone
//! channel empties its source level at rate `2r`.

use std::sync::Arc;

use super::hamiltonian::{
    annihilation, emitter_pair_space, full_cavity_space, lambda_sink_space, raman_sink_space, restrict_to,
    sigma, NV1, NV2,
};
use super::params::{effective_rates, SystemParams};
use super::ModelKind;
use crate::error::Result;
use crate::hilbert::{HilbertSpace, Operator};

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub name: String,
    pub rate: f64,
    pub op: Operator,
}

impl Channel {
    pub fn new<S: Into<String>>(name: S, rate: f64, op: Operator) -> Self {
        Self { name: name.into(), rate, op }
    }

    pub fn is_active(&self) -> bool {
        self.rate != 0.0
    }
}

fn emitter_channels(space: &Arc<HilbertSpace>, p: &SystemParams) -> Result<Vec<Channel>> {
    let mut out = Vec::with_capacity(6);
    for nv in [NV1, NV2] {
        out.push(Channel::new(format!("gamma_10:{nv}"), p.gamma_10, sigma(space, nv, "0", "1")?));
        out.push(Channel::new(format!("gamma_e0:{nv}"), p.gamma_e0, sigma(space, nv, "0", "e")?));
        out.push(Channel::new(format!("gamma_e1:{nv}"), p.gamma_e1, sigma(space, nv, "1", "e")?));
    }
    Ok(out)
}

/// Cavity loss after eliminating the mode: `â ≈ -(g₁σ¹_0e + g₂σ²_0e)/Δ`.
fn eliminated_cavity_channel(p: &SystemParams) -> Result<Channel> {
    let space = emitter_pair_space();
    let delta = if p.delta == 0.0 { f64::INFINITY } else { p.delta };
    let op = sigma(&space, NV1, "0", "e")?
        .scale_re(p.g1 / delta)
        .add(&sigma(&space, NV2, "0", "e")?.scale_re(p.g2 / delta))?;
    Ok(Channel::new("kappa:eliminated", p.kappa, op))
}

fn nine_level_channels(p: &SystemParams) -> Result<Vec<Channel>> {
    let mut out = vec![eliminated_cavity_channel(p)?];
    out.extend(emitter_channels(&emitter_pair_space(), p)?);
    Ok(out)
}

/// Collapse channels for a model tier, in a fixed order: cavity first, then
/// `γ₁₀, γ_e0, γ_e1` for NV1 and NV2.
///
/// The Λ tier uses the nine-level channels projected onto
/// `{|10⟩, |+⟩, |−⟩, |01⟩, |00⟩}`; every jump from that set lands back in it.
/// The Raman tier carries the phenomenological rates `Γ_C` and `Γ_E` as
/// losses from `|10⟩` and `|01⟩` into `|00⟩`.
pub fn build_collapse_ops(p: &SystemParams, kind: ModelKind) -> Result<Vec<Channel>> {
    p.validate()?;
    match kind {
        ModelKind::FullCavity => {
            let space = full_cavity_space(p.n_fock);
            let mut out = vec![Channel::new("kappa", p.kappa, annihilation(&space)?)];
            out.extend(emitter_channels(&space, p)?);
            Ok(out)
        }
        ModelKind::NineLevel => nine_level_channels(p),
        ModelKind::DressedLambda => {
            let space = lambda_sink_space();
            nine_level_channels(p)?
                .into_iter()
                .map(|c| Ok(Channel { op: restrict_to(&c.op, &space)?, ..c }))
                .collect()
        }
        ModelKind::EffectiveRaman => {
            let space = raman_sink_space();
            let (gamma_c, gamma_e) = if p.is_lossless() {
                (0.0, 0.0)
            } else {
                let r = effective_rates(p)?;
                (r.gamma_c, r.gamma_e)
            };
            let mut out = Vec::with_capacity(4);
            for (name, rate) in [("gamma_c", gamma_c), ("gamma_e", gamma_e)] {
                for from in ["10", "01"] {
                    let op = Operator::outer(space.clone(), &["00"], &[from])?;
                    out.push(Channel::new(format!("{name}:{from}"), rate, op));
                }
            }
            Ok(out)
        }
    }
}

//! Observables, fidelities, the transfer gate, tier comparison and the
//! strong-coupling regime map.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{evolve_master, evolve_unitary, Column, TimeGrid, TimeSeries};
use crate::error::{Error, Result};
use crate::hilbert::{same_space, DensityMatrix, Factor, HilbertSpace, Operator, QuantumState, StateVector, C64, I, ONE};
use crate::model::{
    effective_rates, pair_density, pair_embedding, pair_projector, EffectiveRates, ModelKind, ModelSystem,
    SystemParams, CAVITY, NV1, NV2,
};

/// Population of a two-emitter basis or dressed state (`"10"`, `"+"`, ...),
/// summed over cavity photon numbers.
pub fn population<S: QuantumState>(state: &S, label: &str) -> Result<f64> {
    let proj = pair_projector(state.space(), label)?;
    Ok(state.expect(&proj)?.re)
}

/// Population trace stored as column `P<label>` of a series.
pub fn population_series<'a>(series: &'a TimeSeries, label: &str) -> Result<&'a [f64]> {
    series.values(&format!("P{label}"))
}

/// Pure-target fidelity `⟨t|ρ|t⟩`.
pub fn fidelity<S: QuantumState>(state: &S, target: &StateVector) -> Result<f64> {
    if !same_space(state.space(), target.space()) {
        return Err(Error::SpaceMismatch);
    }
    if !target.is_normalized() {
        return Err(Error::InvalidState(format!("target has norm² {}", target.norm_sqr())));
    }
    Ok(state.expect(&Operator::projector(target))?.re)
}

/// Maximally entangled target `(|10⟩ − i|01⟩)/√2` on the emitter pair.
pub fn epr_target() -> Result<StateVector> {
    let pair = crate::model::emitter_pair_space();
    StateVector::superpose(&[
        (ONE, &StateVector::basis(pair.clone(), &["1", "0"])?),
        (-I, &StateVector::basis(pair, &["0", "1"])?),
    ])
}

/// `diag(1, i, 1)` on `{|0⟩, |1⟩, |e⟩}` of emitter `target_nv` (0 or 1),
/// expressed on `space`.
pub fn phase_gate(space: &Arc<HilbertSpace>, target_nv: usize) -> Result<Operator> {
    let nv = match target_nv {
        0 => NV1,
        1 => NV2,
        _ => return Err(Error::InvalidParameter(format!("emitter index {target_nv} (expected 0 or 1)"))),
    };
    let single = Arc::new(HilbertSpace::new(vec![Factor::emitter(nv)])?);
    let mut u = Operator::identity(single);
    u = u.add(&Operator::outer(u.space().clone(), &["1"], &["1"])?.scale(I - ONE))?;
    let names: Vec<&str> = space.factors().iter().map(|f| f.name()).collect();
    match names.as_slice() {
        [NV1, NV2] | [NV1, NV2, CAVITY] => u.embed(target_nv, space),
        [_] => {
            let pair = crate::model::emitter_pair_space();
            let full = u.embed(target_nv, &pair)?;
            let w = pair_embedding(space)?;
            Operator::new(space.clone(), w.adjoint() * full.matrix() * &w)
        }
        _ => Err(Error::IncompatibleScenario(format!("{space} has no emitter {nv}"))),
    }
}

/// States that a unitary can act on, returning the same kind.
pub trait Transformable: QuantumState + Sized {
    fn transform(&self, u: &Operator) -> Result<Self>;
}

impl Transformable for StateVector {
    fn transform(&self, u: &Operator) -> Result<Self> {
        u.apply(self)
    }
}

impl Transformable for DensityMatrix {
    fn transform(&self, u: &Operator) -> Result<Self> {
        self.conjugate_by(u)
    }
}

/// Applies the correction gate `U = diag(1, i)` to emitter `target_nv`.
pub fn apply_phase_gate<S: Transformable>(state: &S, target_nv: usize) -> Result<S> {
    let u = phase_gate(state.space(), target_nv)?;
    state.transform(&u)
}

fn check_amplitudes(alpha: C64, beta: C64) -> Result<()> {
    let n = alpha.norm_sqr() + beta.norm_sqr();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("|α|² + |β|² = {n}, expected 1")));
    }
    Ok(())
}

/// Initial transfer state `(α|0⟩ + β|1⟩)₁|0⟩₂` as label amplitudes.
pub fn transfer_input(alpha: C64, beta: C64) -> Result<[(&'static str, C64); 2]> {
    check_amplitudes(alpha, beta)?;
    Ok([("00", alpha), ("10", beta)])
}

fn nv2_fidelity(rho_pair: &DensityMatrix, alpha: C64, beta: C64) -> Result<f64> {
    let reduced = rho_pair.reduce_to(&[1])?;
    let target = StateVector::new(
        reduced.space().clone(),
        nalgebra::DVector::from_vec(vec![alpha, beta, C64::new(0.0, 0.0)]),
    )?;
    fidelity(&reduced, &target)
}

/// Fidelity of emitter 2 against `α|0⟩ + β|1⟩` after the `U` gate, with
/// emitter 1 and the cavity traced out.
pub fn transfer_fidelity<S: QuantumState>(alpha: C64, beta: C64, result_state: &S) -> Result<f64> {
    check_amplitudes(alpha, beta)?;
    let rho = apply_phase_gate(&pair_density(result_state)?, 1)?;
    nv2_fidelity(&rho, alpha, beta)
}

/// Same as [`transfer_fidelity`] without the correction gate.
pub fn transfer_fidelity_pre_gate<S: QuantumState>(alpha: C64, beta: C64, result_state: &S) -> Result<f64> {
    check_amplitudes(alpha, beta)?;
    nv2_fidelity(&pair_density(result_state)?, alpha, beta)
}

/// Pointwise agreement of two model tiers on the same physical parameters.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub kinds: (ModelKind, ModelKind),
    pub max_pop_deviation: f64,
    /// `|P_a(t) − P_b(t)|` per compared population.
    pub deviations: Vec<Column>,
    pub times: Vec<f64>,
    pub theta_over_omega: f64,
    pub delta_over_g: f64,
    /// Θ ≥ 10Ω and Δ ≥ 5g.
    pub raman_regime: bool,
    pub dispersive_regime: bool,
}

/// Labels whose populations tier comparisons report.
pub const COMPARED_POPULATIONS: [&str; 2] = ["10", "01"];

/// Runs one tier from the given label amplitudes; unitary when lossless,
/// master equation otherwise.
pub fn run_tier(
    p: &SystemParams,
    kind: ModelKind,
    initial: &[(&str, C64)],
    grid: &TimeGrid,
    labels: &[&str],
) -> Result<TimeSeries> {
    let sys = ModelSystem::build(p, kind)?;
    let psi0 = sys.state(initial)?;
    let obs = sys.population_observables(labels)?;
    if sys.is_lossless() {
        Ok(evolve_unitary(&sys.hamiltonian, &psi0, grid, &obs)?.series)
    } else {
        let rho0 = DensityMatrix::from_pure(&psi0);
        Ok(evolve_master(&sys.hamiltonian, &sys.channels, &rho0, grid, &obs)?.series)
    }
}

pub fn compare_tiers(
    p: &SystemParams,
    kinds: (ModelKind, ModelKind),
    initial: &[(&str, C64)],
    grid: &TimeGrid,
) -> Result<ComparisonReport> {
    let a = run_tier(p, kinds.0, initial, grid, &COMPARED_POPULATIONS)?;
    let b = run_tier(p, kinds.1, initial, grid, &COMPARED_POPULATIONS)?;
    let mut deviations = Vec::new();
    let mut worst: f64 = 0.0;
    for label in COMPARED_POPULATIONS {
        let name = format!("P{label}");
        let diff: Vec<f64> = a.values(&name)?.iter().zip(b.values(&name)?).map(|(x, y)| (x - y).abs()).collect();
        worst = diff.iter().copied().fold(worst, f64::max);
        deviations.push(Column { name: format!("d{name}"), values: diff, stderr: None });
    }
    let omega = p.omega1.abs().max(p.omega2.abs());
    let g = p.g1.abs().max(p.g2.abs());
    let theta = crate::model::theta(p)?.abs();
    let theta_over_omega = if omega > 0.0 { theta / omega } else { f64::INFINITY };
    let delta_over_g = if g > 0.0 { p.delta.abs() / g } else { f64::INFINITY };
    Ok(ComparisonReport {
        kinds,
        max_pop_deviation: worst,
        deviations,
        times: a.times.clone(),
        theta_over_omega,
        delta_over_g,
        raman_regime: theta_over_omega >= 10.0,
        dispersive_regime: delta_over_g >= 5.0,
    })
}

/// Parameter a regime-map axis varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepField {
    G1,
    G2,
    /// Both couplings.
    G,
    Delta,
    Omega1,
    Omega2,
    /// Both drives.
    Omega,
    Kappa,
    /// Emitter decay with `γ_e0 = γ_e1 = γ`, `γ₁₀ = γ/5`.
    Gamma,
    GammaE0,
    GammaE1,
    Gamma10,
    /// Multiplies the base κ.
    KappaScale,
    /// Multiplies all base emitter rates.
    GammaScale,
}

impl SweepField {
    pub const ALL: [SweepField; 14] = [
        SweepField::G1,
        SweepField::G2,
        SweepField::G,
        SweepField::Delta,
        SweepField::Omega1,
        SweepField::Omega2,
        SweepField::Omega,
        SweepField::Kappa,
        SweepField::Gamma,
        SweepField::GammaE0,
        SweepField::GammaE1,
        SweepField::Gamma10,
        SweepField::KappaScale,
        SweepField::GammaScale,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepField::G1 => "g1",
            SweepField::G2 => "g2",
            SweepField::G => "g",
            SweepField::Delta => "delta",
            SweepField::Omega1 => "omega1",
            SweepField::Omega2 => "omega2",
            SweepField::Omega => "omega",
            SweepField::Kappa => "kappa",
            SweepField::Gamma => "gamma",
            SweepField::GammaE0 => "gamma_e0",
            SweepField::GammaE1 => "gamma_e1",
            SweepField::Gamma10 => "gamma_10",
            SweepField::KappaScale => "kappa_scale",
            SweepField::GammaScale => "gamma_scale",
        }
    }

    /// `base` with this field set to `v`.
    pub fn apply(self, base: &SystemParams, v: f64) -> SystemParams {
        let mut p = *base;
        match self {
            SweepField::G1 => p.g1 = v,
            SweepField::G2 => p.g2 = v,
            SweepField::G => {
                p.g1 = v;
                p.g2 = v;
            }
            SweepField::Delta => p.delta = v,
            SweepField::Omega1 => p.omega1 = v,
            SweepField::Omega2 => p.omega2 = v,
            SweepField::Omega => {
                p.omega1 = v;
                p.omega2 = v;
            }
            SweepField::Kappa => p.kappa = v,
            SweepField::Gamma => p = p.with_emitter_decay(v),
            SweepField::GammaE0 => p.gamma_e0 = v,
            SweepField::GammaE1 => p.gamma_e1 = v,
            SweepField::Gamma10 => p.gamma_10 = v,
            SweepField::KappaScale => p.kappa *= v,
            SweepField::GammaScale => {
                p.gamma_e0 *= v;
                p.gamma_e1 *= v;
                p.gamma_10 *= v;
            }
        }
        p
    }
}

impl fmt::Display for SweepField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepField::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown sweep axis `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub field: SweepField,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn new(field: SweepField, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("axis `{field}` needs finite values")));
        }
        Ok(Self { field, values })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimePoint {
    /// Swept field values in axis order.
    pub coordinates: Vec<f64>,
    pub params: SystemParams,
    pub rates: EffectiveRates,
}

/// Cartesian product of the axes in row-major order (last axis fastest).
pub fn sweep_points(base: &SystemParams, axes: &[SweepAxis]) -> Result<Vec<(Vec<f64>, SystemParams)>> {
    let mut seen = std::collections::HashSet::new();
    for a in axes {
        if !seen.insert(a.field) {
            return Err(Error::InvalidParameter(format!("axis `{}` listed twice", a.field)));
        }
        if a.values.is_empty() {
            return Err(Error::InvalidParameter(format!("axis `{}` has no values", a.field)));
        }
    }
    let mut points = vec![(Vec::new(), *base)];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|(coords, p)| {
                axis.values.iter().map(move |&v| {
                    let mut c = coords.clone();
                    c.push(v);
                    (c, axis.field.apply(&p, v))
                })
            })
            .collect();
    }
    for (_, p) in &points {
        p.validate()?;
    }
    Ok(points)
}

/// Effective rates and the strong-coupling flag at every grid point.
pub fn regime_map(base: &SystemParams, axes: &[SweepAxis]) -> Result<Vec<RegimePoint>> {
    sweep_points(base, axes)?
        .into_par_iter()
        .map(|(coordinates, params)| Ok(RegimePoint { coordinates, rates: effective_rates(&params)?, params }))
        .collect()
}

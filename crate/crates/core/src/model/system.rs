use std::sync::Arc;

use super::channels::{build_collapse_ops, Channel};
use super::hamiltonian::{
    build_dressed_lambda_h, build_effective_raman_h, build_full_cavity_h, build_nine_level_h,
    emitter_pair_space, lambda_sink_space, pad_with_sink, pair_embedding, pair_state, raman_sink_space, CAVITY,
    NV1, NV2,
};
use super::params::SystemParams;
use super::ModelKind;
use crate::dynamics::Observable;
use crate::error::{Error, Result};
use crate::hilbert::{DensityMatrix, HilbertSpace, Operator, QuantumState, StateVector, C64};

/// Hamiltonian, channels and state space of one model tier, ready to evolve.
#[derive(Debug, Clone)]
pub struct ModelSystem {
    pub kind: ModelKind,
    pub params: SystemParams,
    pub hamiltonian: Operator,
    pub channels: Vec<Channel>,
}

impl ModelSystem {
    pub fn build(params: &SystemParams, kind: ModelKind) -> Result<Self> {
        params.validate()?;
        let hamiltonian = match kind {
            ModelKind::FullCavity => build_full_cavity_h(params)?,
            ModelKind::NineLevel => build_nine_level_h(params)?,
            ModelKind::DressedLambda => pad_with_sink(&build_dressed_lambda_h(params)?, &lambda_sink_space())?,
            ModelKind::EffectiveRaman => pad_with_sink(&build_effective_raman_h(params)?, &raman_sink_space())?,
        };
        let channels = build_collapse_ops(params, kind)?;
        Ok(Self { kind, params: *params, hamiltonian, channels })
    }

    pub fn space(&self) -> &Arc<HilbertSpace> {
        self.hamiltonian.space()
    }

    pub fn is_lossless(&self) -> bool {
        self.channels.iter().all(|c| !c.is_active())
    }

    /// Channels with a nonzero rate.
    pub fn active_channels(&self) -> Vec<Channel> {
        self.channels.iter().filter(|c| c.is_active()).cloned().collect()
    }

    /// Normalized state from amplitudes on two-emitter labels (`"10"`, `"+"`, ...),
    /// with the cavity, if any, in vacuum.
    pub fn state(&self, amplitudes: &[(&str, C64)]) -> Result<StateVector> {
        let space = self.space().clone();
        let mut psi = nalgebra::DVector::<C64>::zeros(space.dim());
        for &(label, amp) in amplitudes {
            let contribution = match self.kind {
                ModelKind::NineLevel => pair_state(label)?.amplitudes().clone(),
                ModelKind::FullCavity => {
                    let vacuum = StateVector::basis(
                        Arc::new(HilbertSpace::new(vec![space.factors()[2].clone()])?),
                        &["0"],
                    )?;
                    pair_state(label)?.tensor(&vacuum).amplitudes().clone()
                }
                ModelKind::DressedLambda | ModelKind::EffectiveRaman => {
                    let index = space.index_of(&[label]).map_err(|_| {
                        Error::IncompatibleScenario(format!("state |{label}⟩ is outside the {:?} tier", self.kind))
                    })?;
                    let mut e = nalgebra::DVector::<C64>::zeros(space.dim());
                    e[index] = C64::new(1.0, 0.0);
                    e
                }
            };
            psi += contribution * amp;
        }
        StateVector::new(space, psi)?.normalized()
    }

    /// Projector onto a two-emitter state, identity on the cavity.
    pub fn population_observable(&self, label: &str) -> Result<Operator> {
        pair_projector(self.space(), label)
    }

    pub fn population_observables(&self, labels: &[&str]) -> Result<Vec<Observable>> {
        labels
            .iter()
            .map(|l| Ok(Observable::new(format!("P{l}"), self.population_observable(l)?)))
            .collect()
    }
}

/// Projector `|v⟩⟨v|` for a two-emitter label, expressed on `space`.
pub fn pair_projector(space: &Arc<HilbertSpace>, label: &str) -> Result<Operator> {
    let v = pair_state(label)?;
    let pair = Operator::projector(&v);
    let names: Vec<&str> = space.factors().iter().map(|f| f.name()).collect();
    match names.as_slice() {
        [NV1, NV2] => Ok(Operator::new(space.clone(), pair.into_matrix())?),
        [NV1, NV2, CAVITY] => {
            let cav = Arc::new(HilbertSpace::new(vec![space.factors()[2].clone()])?);
            let full = pair.tensor(&Operator::identity(cav));
            Operator::new(space.clone(), full.into_matrix())
        }
        [_] => {
            let w = pair_embedding(space)?;
            Operator::new(space.clone(), w.adjoint() * pair.matrix() * &w)
        }
        _ => Err(Error::IncompatibleScenario(format!("{space} is not a two-emitter space"))),
    }
}

/// Reduced two-emitter density matrix on `NV1 ⊗ NV2` for any tier's state.
pub fn pair_density<S: QuantumState>(state: &S) -> Result<DensityMatrix> {
    let rho = state.to_density();
    let space = rho.space().clone();
    let names: Vec<&str> = space.factors().iter().map(|f| f.name()).collect();
    match names.as_slice() {
        [NV1, NV2] => DensityMatrix::from_matrix_unchecked(emitter_pair_space(), rho.matrix().clone()),
        [NV1, NV2, CAVITY] => {
            let reduced = rho.reduce_to(&[0, 1])?;
            DensityMatrix::from_matrix_unchecked(emitter_pair_space(), reduced.matrix().clone())
        }
        [_] => {
            let w = pair_embedding(&space)?;
            DensityMatrix::from_matrix_unchecked(emitter_pair_space(), &w * rho.matrix() * w.adjoint())
        }
        _ => Err(Error::IncompatibleScenario(format!("{space} is not a two-emitter space"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::ONE;

    #[test]
    fn states_map_across_tiers() {
        let p = SystemParams::default();
        for kind in ModelKind::ALL {
            let sys = ModelSystem::build(&p, kind).unwrap();
            let psi = sys.state(&[("00", ONE), ("10", ONE)]).unwrap();
            assert!(psi.is_normalized());
            let rho = pair_density(&psi).unwrap();
            let p10 = pair_projector(&emitter_pair_space(), "10").unwrap();
            assert!((p10.expect_mixed(&rho).unwrap().re - 0.5).abs() < 1e-15, "{kind:?}");
            let obs = sys.population_observable("10").unwrap();
            assert!((psi.expect(&obs).unwrap().re - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn reduced_tiers_reject_foreign_states() {
        let sys = ModelSystem::build(&SystemParams::default(), ModelKind::EffectiveRaman).unwrap();
        assert!(matches!(sys.state(&[("11", ONE)]), Err(Error::IncompatibleScenario(_))));
        let sys = ModelSystem::build(&SystemParams::default(), ModelKind::DressedLambda).unwrap();
        assert!(sys.state(&[("+", ONE)]).is_ok());
    }

    #[test]
    fn spaces_have_expected_dimensions() {
        let p = SystemParams::default();
        let dims: Vec<usize> = ModelKind::ALL
            .iter()
            .map(|&k| ModelSystem::build(&p, k).unwrap().space().dim())
            .collect();
        assert_eq!(dims, vec![18, 9, 5, 3]);
    }
}

//! Hamiltonians for the four model tiers.
//!
//! Every tier is written in the frame where the cavity sits at `+Δâ†â`.
//! Eliminating the vacuum mode at second order then gives the exchange
//! `-Θ(|e0⟩⟨0e| + |0e⟩⟨e0|)`, so the symmetric dressed state `|+⟩` lies at
//! `-Θ` and `|−⟩` at `+Θ`. With that sign the Raman coupling between `|10⟩`
//! and `|01⟩` comes out as `+ξ`, and the reduced tiers agree with each
//! other in phase as well as in population.

use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;

use super::params::{theta, xi, SystemParams, StarkCompensation};
use crate::error::{Error, Result};
use crate::hilbert::{Factor, HilbertSpace, Operator, StateVector, C64, ONE, ZERO};

pub const NV1: &str = "nv1";
pub const NV2: &str = "nv2";
pub const CAVITY: &str = "cavity";

/// Ordered basis of the nine-level model in dressed form.
pub const DRESSED_LABELS: [&str; 9] = ["10", "+", "-", "01", "11", "00", "ee", "1e", "e1"];
/// The driven subspace reached from `|10⟩`.
pub const LAMBDA_LABELS: [&str; 4] = ["10", "+", "-", "01"];
/// Driven subspace plus the dark sink `|00⟩` reached by decay.
pub const LAMBDA_SINK_LABELS: [&str; 5] = ["10", "+", "-", "01", "00"];
pub const RAMAN_LABELS: [&str; 2] = ["10", "01"];
pub const RAMAN_SINK_LABELS: [&str; 3] = ["10", "01", "00"];

fn cached(cell: &'static OnceLock<Arc<HilbertSpace>>, make: fn() -> HilbertSpace) -> Arc<HilbertSpace> {
    cell.get_or_init(|| Arc::new(make())).clone()
}

/// `NV1 ⊗ NV2`, each with basis `{0, 1, e}`.
pub fn emitter_pair_space() -> Arc<HilbertSpace> {
    static CELL: OnceLock<Arc<HilbertSpace>> = OnceLock::new();
    cached(&CELL, || {
        HilbertSpace::new(vec![Factor::emitter(NV1), Factor::emitter(NV2)]).expect("static space")
    })
}

/// `NV1 ⊗ NV2 ⊗ cavity` keeping `n_fock` Fock levels (photon numbers `0..n_fock`).
pub fn full_cavity_space(n_fock: usize) -> Arc<HilbertSpace> {
    Arc::new(
        HilbertSpace::new(vec![
            Factor::emitter(NV1),
            Factor::emitter(NV2),
            Factor::fock(CAVITY, n_fock.saturating_sub(1)),
        ])
            .expect("static space"),
    )
}

pub fn dressed_space() -> Arc<HilbertSpace> {
    static CELL: OnceLock<Arc<HilbertSpace>> = OnceLock::new();
    cached(&CELL, || HilbertSpace::flat("dressed", &DRESSED_LABELS).expect("static space"))
}

pub fn lambda_space() -> Arc<HilbertSpace> {
    static CELL: OnceLock<Arc<HilbertSpace>> = OnceLock::new();
    cached(&CELL, || HilbertSpace::flat("lambda", &LAMBDA_LABELS).expect("static space"))
}

pub fn lambda_sink_space() -> Arc<HilbertSpace> {
    static CELL: OnceLock<Arc<HilbertSpace>> = OnceLock::new();
    cached(&CELL, || HilbertSpace::flat("lambda", &LAMBDA_SINK_LABELS).expect("static space"))
}

pub fn raman_space() -> Arc<HilbertSpace> {
    static CELL: OnceLock<Arc<HilbertSpace>> = OnceLock::new();
    cached(&CELL, || HilbertSpace::flat("raman", &RAMAN_LABELS).expect("static space"))
}

pub fn raman_sink_space() -> Arc<HilbertSpace> {
    static CELL: OnceLock<Arc<HilbertSpace>> = OnceLock::new();
    cached(&CELL, || HilbertSpace::flat("raman", &RAMAN_SINK_LABELS).expect("static space"))
}

/// A two-emitter state in the bare product basis, named by label.
///
/// Accepts `ij` with `i, j ∈ {0, 1, e}` and the dressed states `+`/`-`,
/// `|±⟩ = (|e0⟩ ± |0e⟩)/√2`.
pub fn pair_state(label: &str) -> Result<StateVector> {
    let space = emitter_pair_space();
    match label {
        "+" | "-" => {
            let sign = if label == "+" { ONE } else { -ONE };
            StateVector::superpose(&[
                (ONE, &StateVector::basis(space.clone(), &["e", "0"])?),
                (sign, &StateVector::basis(space, &["0", "e"])?),
            ])
        }
        _ if label.len() == 2 && label.is_ascii() => StateVector::basis(space, &[&label[..1], &label[1..]])
            .map_err(|_| Error::UnknownLabel(label.to_string())),
        _ => Err(Error::UnknownLabel(label.to_string())),
    }
}

/// Isometry whose columns are the pair-basis images of a flat space's labels.
pub fn pair_embedding(space: &HilbertSpace) -> Result<DMatrix<C64>> {
    let [factor] = space.factors() else {
        return Err(Error::IncompatibleScenario(format!("{space} is not a labeled two-emitter basis")));
    };
    let mut w = DMatrix::<C64>::zeros(9, factor.dim());
    for (k, label) in factor.labels().iter().enumerate() {
        w.set_column(k, pair_state(label)?.amplitudes());
    }
    Ok(w)
}

/// Unitary taking dressed-basis coordinates to bare product coordinates.
pub fn dressed_to_product() -> DMatrix<C64> {
    pair_embedding(&dressed_space()).expect("dressed labels are valid")
}

/// Rewrites a pair-space operator in the dressed basis.
pub fn to_dressed_basis(op: &Operator) -> Result<Operator> {
    if **op.space() != *emitter_pair_space() {
        return Err(Error::SpaceMismatch);
    }
    let v = dressed_to_product();
    Operator::new(dressed_space(), v.adjoint() * op.matrix() * &v)
}

/// Rewrites a dressed-basis operator in the bare product basis.
pub fn from_dressed_basis(op: &Operator) -> Result<Operator> {
    if **op.space() != *dressed_space() {
        return Err(Error::SpaceMismatch);
    }
    let v = dressed_to_product();
    Operator::new(emitter_pair_space(), &v * op.matrix() * v.adjoint())
}

/// `|α⟩⟨β|` on one emitter factor of `space`.
pub fn sigma(space: &Arc<HilbertSpace>, factor: &str, alpha: &str, beta: &str) -> Result<Operator> {
    let k = space
        .factor_index(factor)
        .ok_or_else(|| Error::UnknownLabel(factor.to_string()))?;
    let local = Arc::new(HilbertSpace::new(vec![space.factors()[k].clone()])?);
    Operator::outer(local, &[alpha], &[beta])?.embed(k, space)
}

/// Cavity annihilation operator on `space`.
pub fn annihilation(space: &Arc<HilbertSpace>) -> Result<Operator> {
    let k = space
        .factor_index(CAVITY)
        .ok_or_else(|| Error::UnknownLabel(CAVITY.to_string()))?;
    let factor = space.factors()[k].clone();
    let d = factor.dim();
    let mut a = DMatrix::<C64>::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    Operator::new(Arc::new(HilbertSpace::new(vec![factor])?), a)?.embed(k, space)
}

/// `h + h†` for an operator holding only one triangle of couplings.
fn plus_hc(h: Operator) -> Operator {
    let adj = h.dagger();
    h.add(&adj).expect("same space")
}

fn drive_terms(space: &Arc<HilbertSpace>, p: &SystemParams) -> Result<Operator> {
    let mut h = Operator::zeros(space.clone());
    for (nv, omega) in [(NV1, p.omega1), (NV2, p.omega2)] {
        h = h.add(&sigma(space, nv, "e", "1")?.scale_re(omega))?;
    }
    Ok(h)
}

/// Nine-level dipole-dipole Hamiltonian in the bare `NV1 ⊗ NV2` basis.
///
/// `Σⱼ Ωⱼ|e⟩ⱼ⟨1| - Θ|e⟩₁⟨0| ⊗ |0⟩₂⟨e| + H.c.`
pub fn build_nine_level_h(p: &SystemParams) -> Result<Operator> {
    let space = emitter_pair_space();
    let exchange = -theta(p)?;
    let flip = sigma(&space, NV1, "e", "0")?.matmul(&sigma(&space, NV2, "0", "e")?)?;
    let h = drive_terms(&space, p)?.add(&flip.scale_re(exchange))?;
    plus_hc(h).assert_hermitian()
}

/// The nine-level Hamiltonian in the dressed basis [`DRESSED_LABELS`].
pub fn build_nine_level_h_dressed(p: &SystemParams) -> Result<Operator> {
    to_dressed_basis(&build_nine_level_h(p)?)
}

/// Driven Λ subspace `{|10⟩, |+⟩, |−⟩, |01⟩}`.
pub fn build_dressed_lambda_h(p: &SystemParams) -> Result<Operator> {
    let exchange = -theta(p)?;
    let l1 = p.omega1 / std::f64::consts::SQRT_2;
    let l2 = p.omega2 / std::f64::consts::SQRT_2;
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        0.0, l1,        l1,         0.0,
        l1,  exchange,  0.0,        l2,
        l1,  0.0,       -exchange,  -l2,
        0.0, l2,        -l2,        0.0,
    ]);
    Operator::new(lambda_space(), m.map(|x| C64::new(x, 0.0)))
}

/// Two-state Raman Hamiltonian `ξ(|10⟩⟨01| + |01⟩⟨10|)`.
pub fn build_effective_raman_h(p: &SystemParams) -> Result<Operator> {
    let xi = xi(p)?;
    let mut h = Operator::zeros(raman_space());
    h = h.add(&Operator::outer(raman_space(), &["10"], &["01"])?.scale_re(xi))?;
    Ok(plus_hc(h))
}

/// Full model on `NV1 ⊗ NV2 ⊗ cavity`:
///
/// `Δâ†â + Σⱼ gⱼ(â σʲ_e0 + â† σʲ_0e) + Σⱼ Ωⱼ(σʲ_e1 + σʲ_1e) + light-shift compensation`.
pub fn build_full_cavity_h(p: &SystemParams) -> Result<Operator> {
    p.validate()?;
    let space = full_cavity_space(p.n_fock);
    let a = annihilation(&space)?;
    let mut h = drive_terms(&space, p)?;
    for (nv, g) in [(NV1, p.g1), (NV2, p.g2)] {
        h = h.add(&a.matmul(&sigma(&space, nv, "e", "0")?)?.scale_re(g))?;
    }
    let mut h = plus_hc(h).add(&a.dagger().matmul(&a)?.scale_re(p.delta))?;
    for (nv, g) in [(NV1, p.g1), (NV2, p.g2)] {
        let shift = match p.stark_compensation {
            StarkCompensation::Exact => {
                if p.delta == 0.0 {
                    return Err(Error::InvalidParameter("exact compensation needs delta != 0".into()));
                }
                sigma(&space, nv, "e", "e")?.scale_re(g * g / p.delta)
            }
            StarkCompensation::CounterTerm { omega_prime, delta_prime } => {
                sigma(&space, nv, "0", "0")?.scale_re(-omega_prime * omega_prime / delta_prime)
            }
        };
        h = h.add(&shift)?;
    }
    h.assert_hermitian()
}

/// Restriction of a pair-space operator to the span of a flat label set.
pub(crate) fn restrict_to(op: &Operator, space: &Arc<HilbertSpace>) -> Result<Operator> {
    if **op.space() != *emitter_pair_space() {
        return Err(Error::SpaceMismatch);
    }
    let w = pair_embedding(space)?;
    Operator::new(space.clone(), w.adjoint() * op.matrix() * &w)
}

/// Pads an operator on the driven Λ (or Raman) subspace with a decoupled sink.
pub(crate) fn pad_with_sink(op: &Operator, space: &Arc<HilbertSpace>) -> Result<Operator> {
    let d = op.dim();
    let mut m = DMatrix::<C64>::from_element(space.dim(), space.dim(), ZERO);
    m.view_mut((0, 0), (d, d)).copy_from(op.matrix());
    Operator::new(space.clone(), m)
}

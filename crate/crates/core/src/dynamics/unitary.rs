use nalgebra::{DVector, SymmetricEigen};

use super::grid::TimeGrid;
use super::series::{column_names, sample_all, Observable, TimeSeries};
use crate::error::{Error, Result};
use crate::hilbert::{same_space, Operator, StateVector, C64};

/// Norm tolerance of the spectral propagator.
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct UnitaryRun {
    pub series: TimeSeries,
    pub final_state: StateVector,
}

/// Exact propagation `ψ(t) = V e^{−iΛ(t−t₀)} V† ψ₀` for a time-independent
/// Hermitian `h`.
pub fn evolve_unitary(
    h: &Operator,
    psi0: &StateVector,
    grid: &TimeGrid,
    observables: &[Observable],
) -> Result<UnitaryRun> {
    grid.validate()?;
    if !same_space(h.space(), psi0.space()) {
        return Err(Error::SpaceMismatch);
    }
    let h = h.clone().assert_hermitian()?;
    if !psi0.is_normalized() {
        return Err(Error::InvalidState(format!("initial state has norm² {}", psi0.norm_sqr())));
    }
    let eig = SymmetricEigen::new(h.matrix().clone());
    let v = &eig.eigenvectors;
    let coeffs = v.adjoint() * psi0.amplitudes();

    let times = grid.times();
    let mut rows = Vec::with_capacity(times.len());
    let mut last = psi0.clone();
    for &t in &times {
        let dt = t - grid.t_start;
        let phased = DVector::from_iterator(
            coeffs.len(),
            coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, &e)| c * C64::from_polar(1.0, -e * dt)),
        );
        let psi = StateVector::new(h.space().clone(), v * phased)?;
        let drift = (psi.norm_sqr() - 1.0).abs();
        if drift >= NORM_TOL {
            return Err(Error::Integrity(format!("norm drift {drift:e} at t = {t}")));
        }
        rows.push(sample_all(observables, &psi)?);
        last = psi;
    }
    Ok(UnitaryRun { series: TimeSeries::from_rows(times, column_names(observables), &rows), final_state: last })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_effective_raman_h, raman_space, SystemParams};
    use std::sync::Arc;

    fn raman_observables() -> Vec<Observable> {
        let sp = raman_space();
        ["10", "01"]
            .iter()
            .map(|l| Observable::new(format!("P{l}"), Operator::outer(sp.clone(), &[l], &[l]).unwrap()))
            .collect()
    }

    #[test]
    fn raman_rabi_law() {
        let p = SystemParams::default();
        let h = build_effective_raman_h(&p).unwrap();
        let psi0 = StateVector::basis(raman_space(), &["10"]).unwrap();
        let grid = TimeGrid::new(0.0, 4000.0, 401).unwrap();
        let run = evolve_unitary(&h, &psi0, &grid, &raman_observables()).unwrap();
        let xi = 1e-3;
        for (i, &t) in run.series.times.iter().enumerate() {
            let p01 = run.series.values("P01").unwrap()[i];
            assert!((p01 - (xi * t).sin().powi(2)).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let sp = Arc::new(crate::hilbert::HilbertSpace::flat("q", &["a", "b"]).unwrap());
        let h = Operator::zeros(sp.clone());
        let psi0 = StateVector::new(sp, DVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)])).unwrap();
        let run = evolve_unitary(&h, &psi0, &TimeGrid::new(0.0, 10.0, 3).unwrap(), &[]).unwrap();
        assert_eq!(run.final_state, psi0);
    }

    #[test]
    fn rejects_non_hermitian() {
        let sp = raman_space();
        let h = Operator::outer(sp.clone(), &["10"], &["01"]).unwrap();
        let psi0 = StateVector::basis(sp, &["10"]).unwrap();
        let err = evolve_unitary(&h, &psi0, &TimeGrid::new(0.0, 1.0, 2).unwrap(), &[]).unwrap_err();
        assert!(matches!(err, Error::NotHermitian(_)));
    }
}

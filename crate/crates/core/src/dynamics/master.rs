//! Lindblad integration with a fixed-step classical Runge–Kutta scheme.
//!
//! The generator is time independent, so one RK4 step is the fixed linear map
//! `T = 1 + hL + (hL)²/2 + (hL)³/6 + (hL)⁴/24` on `vec(ρ)`. The `m` steps that
//! make up one sample interval are applied as the single matrix `Tᵐ`, which is
//! the same arithmetic as stepping `m` times, done in `O(log m)` products.

use nalgebra::{DMatrix, DVector};

use super::grid::{max_frequency, TimeGrid};
use super::linalg::SplitMatrix;
use super::series::{column_names, sample_all, Observable, TimeSeries};
use crate::error::{Error, Result};
use crate::hilbert::{same_space, DensityMatrix, Operator, C64, I};
use crate::model::Channel;

/// Allowed `|Tr ρ − 1|` and eigenvalue undershoot before aborting.
pub const TRACE_TOL: f64 = 1e-6;
pub const POSITIVITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct MasterRun {
    pub series: TimeSeries,
    pub final_state: DensityMatrix,
    /// Integration step actually used.
    pub dt: f64,
}

/// `H − iΣ r C†C`.
pub(crate) fn effective_hamiltonian(h: &Operator, channels: &[Channel]) -> Result<DMatrix<C64>> {
    let mut m = h.matrix().clone();
    for c in channels.iter().filter(|c| c.is_active()) {
        if !same_space(h.space(), c.op.space()) {
            return Err(Error::SpaceMismatch);
        }
        let cdc = c.op.matrix().adjoint() * c.op.matrix();
        m -= cdc * C64::new(0.0, c.rate);
    }
    Ok(m)
}

/// Column-stacked Liouvillian of `ρ̇ = −i[H,ρ] + Σ r(2CρC† − C†Cρ − ρC†C)`.
pub fn liouvillian(h: &Operator, channels: &[Channel]) -> Result<DMatrix<C64>> {
    let d = h.dim();
    let id = DMatrix::<C64>::identity(d, d);
    let h_nh = effective_hamiltonian(h, channels)?;
    // vec(AρB) = (Bᵀ ⊗ A) vec(ρ)
    let mut l = id.kronecker(&h_nh) * (-I) + h_nh.conjugate().kronecker(&id) * I;
    for c in channels.iter().filter(|c| c.is_active()) {
        l += c.op.matrix().conjugate().kronecker(c.op.matrix()) * C64::new(2.0 * c.rate, 0.0);
    }
    Ok(l)
}

fn rk4_step_map(l: &DMatrix<C64>, h: f64) -> SplitMatrix {
    let hl = SplitMatrix::from_complex(l).scale(C64::new(h, 0.0));
    let mut acc = hl.scale(C64::new(0.25, 0.0)).add_identity();
    for k in [3.0, 2.0, 1.0] {
        acc = hl.mul(&acc).scale(C64::new(1.0 / k, 0.0)).add_identity();
    }
    acc
}

fn unvec(v: &DVector<C64>, d: usize) -> DMatrix<C64> {
    DMatrix::from_column_slice(d, d, v.as_slice())
}

/// Integrates the master equation and samples observables on `grid`.
///
/// `ρ` is re-hermitized at every sample; a trace drift above `TRACE_TOL` or an
/// eigenvalue below `−POSITIVITY_TOL` aborts with [`Error::Integrity`].
pub fn evolve_master(
    h: &Operator,
    channels: &[Channel],
    rho0: &DensityMatrix,
    grid: &TimeGrid,
    observables: &[Observable],
) -> Result<MasterRun> {
    if !same_space(h.space(), rho0.space()) {
        return Err(Error::SpaceMismatch);
    }
    let h = h.clone().assert_hermitian()?;
    rho0.validate(1e-10, 1e-8, 1e-8)?;
    let (steps, dt) = grid.resolve_step(max_frequency(&h, channels))?;
    let d = h.dim();
    let l = liouvillian(&h, channels)?;
    let propagator = rk4_step_map(&l, dt).pow(steps);

    let times = grid.times();
    let mut rows = Vec::with_capacity(times.len());
    let mut rho = rho0.clone();
    rows.push(sample_all(observables, &rho)?);
    let mut v = DVector::from_column_slice(rho.matrix().as_slice());
    for &t in &times[1..] {
        v = propagator.mul_vec(&v);
        let mut next = DensityMatrix::from_matrix_unchecked(h.space().clone(), unvec(&v, d))?;
        next.hermitize();
        check_integrity(&next, t)?;
        v = DVector::from_column_slice(next.matrix().as_slice());
        rows.push(sample_all(observables, &next)?);
        rho = next;
    }
    Ok(MasterRun {
        series: TimeSeries::from_rows(times, column_names(observables), &rows),
        final_state: rho,
        dt,
    })
}

fn check_integrity(rho: &DensityMatrix, t: f64) -> Result<()> {
    let drift = (rho.trace() - 1.0).abs();
    if drift.is_nan() || drift > TRACE_TOL {
        return Err(Error::Integrity(format!(
            "trace drifted by {drift:e} at t = {t}; reduce dt_max"
        )));
    }
    let min_eig = rho.min_eigenvalue();
    if min_eig.is_nan() || min_eig < -POSITIVITY_TOL {
        return Err(Error::Integrity(format!(
            "density matrix eigenvalue {min_eig:e} at t = {t}; reduce dt_max"
        )));
    }
    Ok(())
}

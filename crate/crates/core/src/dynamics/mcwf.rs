//! Monte Carlo wave-function unraveling of the master equation.
//!
//! Between jumps the unnormalized state follows `H_nh = H − iΣ r C†C`, with
//! propagators `exp(−iH_nh·2ᵏτ)` precomputed for a tick `τ = step/64`. A jump
//! fires when `‖ψ‖²` drops below a uniform draw; the crossing tick is located
//! by binary search, so jump times are resolved to `step/2⁶`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::grid::{max_frequency, TimeGrid};
use super::linalg::expm;
use super::master::effective_hamiltonian;
use super::series::{column_names, sample_all, Column, Observable, TimeSeries, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::hilbert::{same_space, DensityMatrix, Operator, StateVector, C64};
use crate::model::Channel;

/// Ticks per integration step (jump-time resolution `step / 2⁶`).
pub const TICK_LEVELS: u32 = 6;
const TICKS_PER_STEP: u64 = 1 << TICK_LEVELS;
const NORM_FLOOR: f64 = 1e-250;

/// Precomputed no-jump propagators for one model and step.
struct Propagators {
    /// `powers[k] = exp(−iH_nh·2ᵏτ)` for `k = 0..=TICK_LEVELS`.
    powers: Vec<DMatrix<C64>>,
    tick: f64,
    ticks_per_interval: u64,
}

impl Propagators {
    fn new(h: &Operator, channels: &[Channel], grid: &TimeGrid) -> Result<Self> {
        let (steps, dt) = grid.resolve_step(max_frequency(h, channels))?;
        let tick = dt / TICKS_PER_STEP as f64;
        let h_nh = effective_hamiltonian(h, channels)?;
        let base = expm(&(h_nh * C64::new(0.0, -tick)));
        let mut powers = vec![base];
        for k in 1..=TICK_LEVELS as usize {
            let prev = &powers[k - 1];
            powers.push(prev * prev);
        }
        Ok(Self { powers, tick, ticks_per_interval: steps * TICKS_PER_STEP })
    }
}

struct Trajectory<'a> {
    channels: &'a [Channel],
    props: &'a Propagators,
    rng: ChaCha8Rng,
    psi: DVector<C64>,
    threshold: f64,
    jumps: Vec<(f64, usize)>,
}

impl<'a> Trajectory<'a> {
    fn draw(rng: &mut ChaCha8Rng) -> f64 {
        // uniform on (0, 1]
        1.0 - rng.random::<f64>()
    }

    /// Advances one sample interval starting at `t0`.
    fn advance_interval(&mut self, t0: f64) -> Result<()> {
        let mut done: u64 = 0;
        let total = self.props.ticks_per_interval;
        while done < total {
            // the largest chunk that stays aligned with the step structure
            let mut level = TICK_LEVELS.min(63 - (total - done).leading_zeros());
            loop {
                let chunk = 1u64 << level;
                let candidate = &self.props.powers[level as usize] * &self.psi;
                let norm = candidate.norm_squared();
                if norm > self.threshold {
                    self.psi = candidate;
                    done += chunk;
                    break;
                }
                if level == 0 {
                    self.psi = candidate;
                    done += 1;
                    let t = t0 + done as f64 * self.props.tick;
                    self.jump(t)?;
                    break;
                }
                level -= 1;
            }
        }
        Ok(())
    }

    fn jump(&mut self, t: f64) -> Result<()> {
        let weights: Vec<f64> = self
            .channels
            .iter()
            .map(|c| if c.is_active() { c.rate * (c.op.matrix() * &self.psi).norm_squared() } else { 0.0 })
            .collect();
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 || !total.is_finite() || self.psi.norm_squared() < NORM_FLOOR {
            return Err(Error::Integrity(format!(
                "state norm {:e} fell below the jump threshold at t = {t} with no channel to absorb it",
                self.psi.norm_squared()
            )));
        }
        let pick = Self::draw(&mut self.rng) * total;
        let mut acc = 0.0;
        let mut chosen = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
        for (k, w) in weights.iter().enumerate() {
            acc += w;
            if *w > 0.0 && pick <= acc {
                chosen = k;
                break;
            }
        }
        let jumped = self.channels[chosen].op.matrix() * &self.psi;
        let n = jumped.norm();
        self.psi = jumped / C64::new(n, 0.0);
        self.jumps.push((t, chosen));
        self.threshold = Self::draw(&mut self.rng);
        Ok(())
    }
}

fn check_inputs(h: &Operator, channels: &[Channel], psi0: &StateVector) -> Result<()> {
    if !same_space(h.space(), psi0.space()) || channels.iter().any(|c| !same_space(h.space(), c.op.space())) {
        return Err(Error::SpaceMismatch);
    }
    h.clone().assert_hermitian()?;
    if !psi0.is_normalized() {
        return Err(Error::InvalidState(format!("initial state has norm² {}", psi0.norm_sqr())));
    }
    Ok(())
}

fn run_trajectory(
    h: &Operator,
    channels: &[Channel],
    props: &Propagators,
    psi0: &StateVector,
    grid: &TimeGrid,
    observables: &[Observable],
    seed: u64,
) -> Result<(Vec<Vec<f64>>, TrajectoryRecord)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let threshold = Trajectory::draw(&mut rng);
    let mut traj = Trajectory {
        channels,
        props,
        rng,
        psi: psi0.amplitudes().clone(),
        threshold,
        jumps: Vec::new(),
    };
    let times = grid.times();
    let mut rows = Vec::with_capacity(times.len());
    rows.push(sample_all(observables, psi0)?);
    for &t in &times[..times.len() - 1] {
        traj.advance_interval(t)?;
        let state = StateVector::new(h.space().clone(), traj.psi.clone())?.normalized()?;
        rows.push(sample_all(observables, &state)?);
    }
    let final_state = StateVector::new(h.space().clone(), traj.psi)?.normalized()?;
    Ok((rows, TrajectoryRecord { seed, jump_events: traj.jumps, final_state }))
}

/// One quantum trajectory; `seed` fully determines it.
pub fn mcwf_trajectory(
    h: &Operator,
    channels: &[Channel],
    psi0: &StateVector,
    grid: &TimeGrid,
    observables: &[Observable],
    seed: u64,
) -> Result<(TimeSeries, TrajectoryRecord)> {
    check_inputs(h, channels, psi0)?;
    let props = Propagators::new(h, channels, grid)?;
    let (rows, record) = run_trajectory(h, channels, &props, psi0, grid, observables, seed)?;
    Ok((TimeSeries::from_rows(grid.times(), column_names(observables), &rows), record))
}

#[derive(Debug, Clone)]
pub struct EnsembleRun {
    /// Trajectory-averaged observables with per-point standard errors.
    pub series: TimeSeries,
    /// Ensemble average of the final projectors `|ψ⟩⟨ψ|`.
    pub final_state: DensityMatrix,
    pub records: Vec<TrajectoryRecord>,
}

/// Averages `n_traj` trajectories seeded `seed0, seed0 + 1, ...`.
///
/// Trajectories may run in parallel; the reduction is always done in seed
/// order, so results do not depend on the thread schedule.
pub fn mcwf_ensemble(
    h: &Operator,
    channels: &[Channel],
    psi0: &StateVector,
    grid: &TimeGrid,
    observables: &[Observable],
    n_traj: usize,
    seed0: u64,
) -> Result<EnsembleRun> {
    if n_traj == 0 {
        return Err(Error::InvalidParameter("n_traj must be at least 1".into()));
    }
    check_inputs(h, channels, psi0)?;
    let props = Propagators::new(h, channels, grid)?;
    let results: Vec<(Vec<Vec<f64>>, TrajectoryRecord)> = (0..n_traj as u64)
        .into_par_iter()
        .map(|k| run_trajectory(h, channels, &props, psi0, grid, observables, seed0.wrapping_add(k)))
        .collect::<Result<_>>()?;

    let names = column_names(observables);
    let n_t = grid.n_samples;
    let n_c = names.len();
    let mut sum = vec![vec![0.0; n_c]; n_t];
    let mut sum_sq = vec![vec![0.0; n_c]; n_t];
    let d = h.dim();
    let mut rho = DMatrix::<C64>::zeros(d, d);
    for (rows, record) in &results {
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                sum[i][j] += v;
                sum_sq[i][j] += v * v;
            }
        }
        let a = record.final_state.amplitudes();
        rho += a * a.adjoint();
    }
    let n = n_traj as f64;
    let columns = names
        .into_iter()
        .enumerate()
        .map(|(j, name)| {
            let values: Vec<f64> = (0..n_t).map(|i| sum[i][j] / n).collect();
            let stderr = (0..n_t)
                .map(|i| {
                    if n_traj < 2 {
                        return 0.0;
                    }
                    let mean = values[i];
                    let var = ((sum_sq[i][j] - n * mean * mean) / (n - 1.0)).max(0.0);
                    (var / n).sqrt()
                })
                .collect();
            Column { name, values, stderr: Some(stderr) }
        })
        .collect();
    let final_state = DensityMatrix::from_matrix_unchecked(h.space().clone(), rho / C64::new(n, 0.0))?;
    Ok(EnsembleRun {
        series: TimeSeries { times: grid.times(), columns, n_traj: Some(n_traj) },
        final_state,
        records: results.into_iter().map(|(_, r)| r).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_unitary;
    use crate::hilbert::{Factor, HilbertSpace};
    use crate::model::{build_nine_level_h, emitter_pair_space, pair_state, SystemParams};
    use std::sync::Arc;

    fn single_nv(rate: f64) -> (Arc<HilbertSpace>, Vec<Channel>, StateVector) {
        let sp = Arc::new(HilbertSpace::new(vec![Factor::emitter("nv")]).unwrap());
        let ch = vec![Channel::new("e0", rate, Operator::outer(sp.clone(), &["0"], &["e"]).unwrap())];
        let psi = StateVector::basis(sp.clone(), &["e"]).unwrap();
        (sp, ch, psi)
    }

    #[test]
    fn no_channels_reproduces_unitary() {
        let p = SystemParams { omega1: 0.03, omega2: 0.02, ..SystemParams::default() };
        let h = build_nine_level_h(&p).unwrap();
        let psi0 = StateVector::new(emitter_pair_space(), pair_state("10").unwrap().amplitudes().clone()).unwrap();
        let grid = TimeGrid::new(0.0, 200.0, 21).unwrap();
        let obs: Vec<Observable> =
            ["10", "01"].iter().map(|l| Observable::new(*l, Operator::projector(&pair_state(l).unwrap()))).collect();
        let u = evolve_unitary(&h, &psi0, &grid, &obs).unwrap();
        for seed in [0, 7, 99] {
            let (s, rec) = mcwf_trajectory(&h, &[], &psi0, &grid, &obs, seed).unwrap();
            assert!(rec.jump_events.is_empty());
            assert!(u.series.max_deviation(&s, &["10", "01"]).unwrap() < 1e-10);
        }
    }

    #[test]
    fn seed_determines_trajectory() {
        let (sp, ch, psi) = single_nv(0.05);
        let h = Operator::zeros(sp.clone());
        let obs = [Observable::new("Pe", Operator::outer(sp, &["e"], &["e"]).unwrap())];
        let grid = TimeGrid::new(0.0, 30.0, 31).unwrap();
        let a = mcwf_trajectory(&h, &ch, &psi, &grid, &obs, 5).unwrap();
        let b = mcwf_trajectory(&h, &ch, &psi, &grid, &obs, 5).unwrap();
        assert_eq!(a, b);
        let single = mcwf_ensemble(&h, &ch, &psi, &grid, &obs, 1, 5).unwrap();
        assert_eq!(single.series.columns[0].values, a.0.columns[0].values);
    }

    #[test]
    fn jump_times_are_ordered_and_in_range() {
        let (sp, ch, psi) = single_nv(0.2);
        let h = Operator::zeros(sp);
        let grid = TimeGrid::new(0.0, 50.0, 11).unwrap();
        for seed in 0..50 {
            let (_, rec) = mcwf_trajectory(&h, &ch, &psi, &grid, &[], seed).unwrap();
            assert!(rec.jump_events.len() <= 1);
            for w in rec.jump_events.windows(2) {
                assert!(w[0].0 < w[1].0);
            }
            assert!(rec.jump_events.iter().all(|&(t, _)| (0.0..=50.0).contains(&t)));
        }
    }

    #[test]
    fn ensemble_tracks_exponential_decay() {
        let rate = 0.05;
        let (sp, ch, psi) = single_nv(rate);
        let h = Operator::zeros(sp.clone());
        let obs = [Observable::new("Pe", Operator::outer(sp, &["e"], &["e"]).unwrap())];
        let grid = TimeGrid::new(0.0, 20.0, 21).unwrap();
        let run = mcwf_ensemble(&h, &ch, &psi, &grid, &obs, 2000, 11).unwrap();
        let col = &run.series.columns[0];
        let se = col.stderr.as_ref().unwrap();
        for (i, t) in run.series.times.iter().enumerate() {
            let want = (-2.0 * rate * t).exp();
            assert!((col.values[i] - want).abs() <= 4.0 * se[i] + 1e-12, "t={t}");
        }
        assert!((run.final_state.trace() - 1.0).abs() < 1e-12);
    }
}

//! Scenario dispatch: config in, CSV text and metadata out.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{InitialState, ParamsSpec, ScenarioConfig, ScenarioKind, SolverSpec, SweepSpec};
use super::units::PhysicalParams;
use super::CliError;
use crate::analysis::{self, SweepField};
use crate::dynamics::{
    evolve_master, evolve_unitary, format_number, mcwf_ensemble, Column, Observable, TimeGrid, TimeSeries,
};
use crate::error::Error;
use crate::hilbert::{DensityMatrix, Factor, HilbertSpace, Operator, StateVector, C64, ONE};
use crate::model::{
    annihilation, effective_rates, Advisory, Channel, EffectiveRates, ModelKind, ModelSystem, SystemParams,
};

/// Everything a run writes: one CSV table and the metadata record.
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// `timeseries` or `sweep`; the CSV lands in `<prefix>_<kind>.csv`.
    pub table_kind: &'static str,
    pub csv: String,
    pub meta: Meta,
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub scenario: ScenarioKind,
    pub model: ModelKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare_with: Option<ModelKind>,
    pub params: SystemParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub physical_params: Option<PhysicalParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_rates: Option<EffectiveRates>,
    pub advisories: Vec<String>,
    pub solver: SolverSpec,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<TimeGrid>,
    /// Integration step actually used by the master or trajectory solver.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub results: BTreeMap<String, Value>,
}

fn advisory_text(a: &Advisory) -> String {
    match a {
        Advisory::WeakDispersion { ratio } => format!("weak dispersion: delta/g = {ratio}"),
        Advisory::WeakRamanDetuning { ratio } => format!("weak Raman detuning: theta/omega = {ratio}"),
    }
}

/// Resolved configuration plus command-line overrides.
struct Plan<'a> {
    cfg: &'a ScenarioConfig,
    params: SystemParams,
    solver: SolverSpec,
    seed: u64,
}

impl<'a> Plan<'a> {
    fn new(cfg: &'a ScenarioConfig, seed_override: Option<u64>) -> Result<Self, CliError> {
        cfg.validate()?;
        let params = cfg.params.resolve()?;
        let solver = match (cfg.solver, seed_override) {
            (SolverSpec::Mcwf { n_traj, .. }, Some(seed0)) => SolverSpec::Mcwf { n_traj, seed0 },
            (s, _) => s,
        };
        let seed = match solver {
            SolverSpec::Mcwf { seed0, .. } => seed0,
            _ => seed_override.unwrap_or(0),
        };
        Ok(Self { cfg, params, solver, seed })
    }

    fn meta(&self, params: SystemParams) -> Meta {
        Meta {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            schema_version: self.cfg.schema_version,
            scenario: self.cfg.scenario,
            model: self.cfg.model,
            compare_with: self.cfg.compare_with,
            params,
            physical_params: match &self.cfg.params {
                ParamsSpec::Physical(p) => Some(*p),
                ParamsSpec::Dimensionless(_) => None,
            },
            effective_rates: effective_rates(&params).ok(),
            advisories: params.advisories().iter().map(advisory_text).collect(),
            solver: self.solver,
            seed: self.seed,
            grid: None,
            dt: None,
            results: BTreeMap::new(),
        }
    }

    fn grid(&self, natural_end: f64) -> Result<TimeGrid, CliError> {
        let g = &self.cfg.grid;
        let grid = TimeGrid {
            t_start: g.t_start,
            t_end: g.t_end.unwrap_or(g.t_start + natural_end),
            n_samples: g.n_samples,
            dt_max: g.dt_max,
        };
        grid.validate()?;
        Ok(grid)
    }
}

struct Evolution {
    series: TimeSeries,
    final_state: DensityMatrix,
    dt: Option<f64>,
}

fn evolve(
    h: &Operator,
    channels: &[Channel],
    psi0: &StateVector,
    grid: &TimeGrid,
    obs: &[Observable],
    solver: SolverSpec,
) -> Result<Evolution, Error> {
    match solver {
        SolverSpec::Unitary => {
            if channels.iter().any(Channel::is_active) {
                return Err(Error::IncompatibleScenario("the unitary solver cannot run a lossy model".into()));
            }
            let run = evolve_unitary(h, psi0, grid, obs)?;
            Ok(Evolution { series: run.series, final_state: DensityMatrix::from_pure(&run.final_state), dt: None })
        }
        SolverSpec::Master => {
            let run = evolve_master(h, channels, &DensityMatrix::from_pure(psi0), grid, obs)?;
            Ok(Evolution { series: run.series, final_state: run.final_state, dt: Some(run.dt) })
        }
        SolverSpec::Mcwf { n_traj, seed0 } => {
            let run = mcwf_ensemble(h, channels, psi0, grid, obs, n_traj, seed0)?;
            let dt = grid.resolve_step(crate::dynamics::max_frequency(h, channels))?.1;
            Ok(Evolution { series: run.series, final_state: run.final_state, dt: Some(dt) })
        }
    }
}

fn evolve_system(
    sys: &ModelSystem,
    initial: &[(&str, C64)],
    grid: &TimeGrid,
    labels: &[&str],
    solver: SolverSpec,
) -> Result<Evolution, Error> {
    let psi0 = sys.state(initial)?;
    let obs = sys.population_observables(labels)?;
    evolve(&sys.hamiltonian, &sys.channels, &psi0, grid, &obs, solver)
}

fn named_label(cfg: &ScenarioConfig, default: &'static str) -> Result<String, CliError> {
    match &cfg.initial_state {
        None => Ok(default.to_string()),
        Some(InitialState::Named { named }) => Ok(named.clone()),
        Some(InitialState::Amplitudes { .. }) => Err(CliError::Config(format!(
            "scenario {:?} takes a named initial state",
            cfg.scenario
        ))),
    }
}

fn transfer_amplitudes(cfg: &ScenarioConfig) -> Result<(C64, C64), CliError> {
    match &cfg.initial_state {
        None => Ok((C64::new(FRAC_1_SQRT_2, 0.0), C64::new(FRAC_1_SQRT_2, 0.0))),
        Some(s) => s
            .amplitudes()
            .ok_or_else(|| CliError::Config("transfer takes `alpha`/`beta` amplitudes".into())),
    }
}

fn rates_or_config_error(p: &SystemParams) -> Result<EffectiveRates, CliError> {
    effective_rates(p).map_err(CliError::from)
}

const TRANSFER_LABELS: [&str; 3] = ["00", "10", "01"];
const ENTANGLE_LABELS: [&str; 5] = ["10", "01", "+", "-", "00"];

/// Executes a single-run scenario.
pub fn run(cfg: &ScenarioConfig, seed_override: Option<u64>) -> Result<RunOutput, CliError> {
    let plan = Plan::new(cfg, seed_override)?;
    match cfg.scenario {
        ScenarioKind::Entangle => run_entangle(&plan),
        ScenarioKind::Transfer => run_transfer(&plan),
        ScenarioKind::TierCompare => run_tier_compare(&plan),
        ScenarioKind::DecayCheck => run_decay_check(&plan),
        ScenarioKind::Fig3Sweep | ScenarioKind::RegimeMap => Err(CliError::Config(format!(
            "scenario {:?} is a sweep; use the `sweep` command",
            cfg.scenario
        ))),
    }
}

fn final_populations(meta: &mut Meta, series: &TimeSeries) -> Result<(), CliError> {
    for c in &series.columns {
        if let Some(v) = c.values.last() {
            meta.results.insert(format!("final_{}", c.name), json!(v));
        }
    }
    Ok(())
}

fn run_entangle(plan: &Plan) -> Result<RunOutput, CliError> {
    let label = named_label(plan.cfg, "10")?;
    let rates = rates_or_config_error(&plan.params)?;
    let grid = plan.grid(rates.t_entangle)?;
    let sys = ModelSystem::build(&plan.params, plan.cfg.model)?;
    let labels: Vec<&str> = ENTANGLE_LABELS
        .into_iter()
        .filter(|l| sys.population_observable(l).is_ok())
        .collect();
    let ev = evolve_system(&sys, &[(label.as_str(), ONE)], &grid, &labels, plan.solver)?;
    let mut meta = plan.meta(plan.params);
    meta.grid = Some(grid);
    meta.dt = ev.dt;
    let pair = crate::model::pair_density(&ev.final_state)?;
    meta.results.insert("epr_fidelity".into(), json!(analysis::fidelity(&pair, &analysis::epr_target()?)?));
    final_populations(&mut meta, &ev.series)?;
    Ok(RunOutput { table_kind: "timeseries", csv: ev.series.to_csv(), meta })
}

fn transfer_point(
    params: &SystemParams,
    model: ModelKind,
    grid: &TimeGrid,
    alpha: C64,
    beta: C64,
    solver: SolverSpec,
) -> Result<(Evolution, f64, f64), Error> {
    let sys = ModelSystem::build(params, model)?;
    let input = analysis::transfer_input(alpha, beta)?;
    let ev = evolve_system(&sys, &input, grid, &TRANSFER_LABELS, solver)?;
    // couplings off at t_f, then U on emitter 2
    let post = analysis::transfer_fidelity(alpha, beta, &ev.final_state)?;
    let pre = analysis::transfer_fidelity_pre_gate(alpha, beta, &ev.final_state)?;
    Ok((ev, post, pre))
}

fn run_transfer(plan: &Plan) -> Result<RunOutput, CliError> {
    let (alpha, beta) = transfer_amplitudes(plan.cfg)?;
    let rates = rates_or_config_error(&plan.params)?;
    let grid = plan.grid(rates.t_transfer)?;
    let (ev, post, pre) = transfer_point(&plan.params, plan.cfg.model, &grid, alpha, beta, plan.solver)?;
    let mut meta = plan.meta(plan.params);
    meta.grid = Some(grid);
    meta.dt = ev.dt;
    meta.results.insert("alpha".into(), json!([alpha.re, alpha.im]));
    meta.results.insert("beta".into(), json!([beta.re, beta.im]));
    meta.results.insert("transfer_fidelity".into(), json!(post));
    meta.results.insert("transfer_fidelity_pre_gate".into(), json!(pre));
    final_populations(&mut meta, &ev.series)?;
    Ok(RunOutput { table_kind: "timeseries", csv: ev.series.to_csv(), meta })
}

fn run_tier_compare(plan: &Plan) -> Result<RunOutput, CliError> {
    let other = plan.cfg.compare_with.ok_or_else(|| CliError::Config("tier_compare needs `compare_with`".into()))?;
    let amps: Vec<(String, C64)> = match &plan.cfg.initial_state {
        Some(InitialState::Amplitudes { .. }) => {
            let (a, b) = transfer_amplitudes(plan.cfg)?;
            analysis::transfer_input(a, b)?.iter().map(|(l, z)| (l.to_string(), *z)).collect()
        }
        _ => vec![(named_label(plan.cfg, "10")?, ONE)],
    };
    let initial: Vec<(&str, C64)> = amps.iter().map(|(l, z)| (l.as_str(), *z)).collect();
    let rates = rates_or_config_error(&plan.params)?;
    let grid = plan.grid(rates.t_transfer)?;
    let labels = analysis::COMPARED_POPULATIONS;
    let kinds = [plan.cfg.model, other];
    let runs = kinds
        .iter()
        .map(|&k| evolve_system(&ModelSystem::build(&plan.params, k)?, &initial, &grid, &labels, plan.solver))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut columns = Vec::new();
    for (kind, ev) in kinds.iter().zip(&runs) {
        for c in &ev.series.columns {
            columns.push(Column { name: format!("{kind}_{}", c.name), values: c.values.clone(), stderr: c.stderr.clone() });
        }
    }
    let mut worst: f64 = 0.0;
    for l in labels {
        let name = format!("P{l}");
        let d: Vec<f64> = runs[0]
            .series
            .values(&name)?
            .iter()
            .zip(runs[1].series.values(&name)?)
            .map(|(a, b)| (a - b).abs())
            .collect();
        worst = d.iter().copied().fold(worst, f64::max);
        columns.push(Column { name: format!("d{name}"), values: d, stderr: None });
    }
    let series = TimeSeries { times: grid.times(), columns, n_traj: runs[0].series.n_traj };
    let mut meta = plan.meta(plan.params);
    meta.grid = Some(grid);
    meta.dt = runs[0].dt;
    meta.results.insert("max_pop_deviation".into(), json!(worst));
    let theta = crate::model::theta(&plan.params)?.abs();
    let omega = plan.params.omega1.abs().max(plan.params.omega2.abs());
    let g = plan.params.g1.abs().max(plan.params.g2.abs());
    meta.results.insert("theta_over_omega".into(), json!(theta / omega));
    meta.results.insert("delta_over_g".into(), json!(plan.params.delta.abs() / g));
    Ok(RunOutput { table_kind: "timeseries", csv: series.to_csv(), meta })
}

fn run_decay_check(plan: &Plan) -> Result<RunOutput, CliError> {
    let p = &plan.params;
    let gamma = p.gamma_e0 + p.gamma_e1;
    let fastest = gamma.max(p.kappa);
    if fastest <= 0.0 {
        return Err(CliError::Config("decay_check needs gamma_e0 + gamma_e1 > 0 or kappa > 0".into()));
    }
    if plan.solver == SolverSpec::Unitary {
        return Err(CliError::Config("decay_check needs the master or mcwf solver".into()));
    }
    let grid = plan.grid(2.5 / (2.0 * fastest))?;
    let times = grid.times();
    let mut columns = Vec::new();
    let mut meta = plan.meta(*p);
    let mut worst: f64 = 0.0;
    let mut push_check = |name: &str, ev: Evolution, rate: f64, columns: &mut Vec<Column>| -> Result<(), CliError> {
        let sim = ev.series.columns.into_iter().next().expect("one observable");
        let exact: Vec<f64> = times.iter().map(|t| (-2.0 * rate * (t - grid.t_start)).exp()).collect();
        let err = sim.values.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(err);
        meta.results.insert(format!("max_abs_error_{name}"), json!(err));
        meta.dt = ev.dt;
        columns.push(Column { name: name.to_string(), ..sim });
        columns.push(Column { name: format!("{name}_exact"), values: exact, stderr: None });
        Ok(())
    };
    if gamma > 0.0 {
        let sp = Arc::new(HilbertSpace::new(vec![Factor::emitter("nv")])?);
        let channels = vec![
            Channel::new("gamma_e0", p.gamma_e0, Operator::outer(sp.clone(), &["0"], &["e"])?),
            Channel::new("gamma_e1", p.gamma_e1, Operator::outer(sp.clone(), &["1"], &["e"])?),
        ];
        let psi0 = StateVector::basis(sp.clone(), &["e"])?;
        let obs = [Observable::new("Pe", Operator::outer(sp.clone(), &["e"], &["e"])?)];
        let ev = evolve(&Operator::zeros(sp), &channels, &psi0, &grid, &obs, plan.solver)?;
        push_check("Pe", ev, gamma, &mut columns)?;
    }
    if p.kappa > 0.0 {
        let sp = Arc::new(HilbertSpace::new(vec![Factor::fock("cavity", 1)])?);
        let a = annihilation(&sp)?;
        let obs = [Observable::new("n", a.dagger().matmul(&a)?)];
        let psi0 = StateVector::basis(sp.clone(), &["1"])?;
        let ev = evolve(&Operator::zeros(sp), &[Channel::new("kappa", p.kappa, a)], &psi0, &grid, &obs, plan.solver)?;
        push_check("n", ev, p.kappa, &mut columns)?;
    }
    let n_traj = match plan.solver {
        SolverSpec::Mcwf { n_traj, .. } => Some(n_traj),
        _ => None,
    };
    let series = TimeSeries { times, columns, n_traj };
    meta.grid = Some(grid);
    meta.results.insert("max_abs_error".into(), json!(worst));
    Ok(RunOutput { table_kind: "timeseries", csv: series.to_csv(), meta })
}

/// Executes a parameter sweep: one CSV row per grid point.
pub fn sweep(cfg: &ScenarioConfig, seed_override: Option<u64>) -> Result<RunOutput, CliError> {
    let plan = Plan::new(cfg, seed_override)?;
    let spec = match (&cfg.sweep, cfg.scenario) {
        (Some(s), _) => s.clone(),
        (None, ScenarioKind::Fig3Sweep) => SweepSpec::default_rates(),
        (None, _) => SweepSpec { axes: Vec::new() },
    };
    let axes = spec.resolve()?;
    let points = analysis::sweep_points(&plan.params, &axes)?;
    let dynamic = match cfg.scenario {
        ScenarioKind::RegimeMap => None,
        ScenarioKind::Fig3Sweep | ScenarioKind::Transfer => Some(ScenarioKind::Transfer),
        ScenarioKind::Entangle => Some(ScenarioKind::Entangle),
        other => return Err(CliError::Config(format!("scenario {other:?} cannot be swept"))),
    };

    let mut header: Vec<String> = axes.iter().map(|a| a.field.to_string()).collect();
    header.extend(
        ["kappa", "gamma_e0", "gamma_10", "xi", "xi_sq", "gamma_c", "gamma_e", "loss_product", "strong_coupling"]
            .map(String::from),
    );
    match dynamic {
        Some(ScenarioKind::Transfer) => header.extend(["transfer_fidelity", "transfer_fidelity_pre_gate"].map(String::from)),
        Some(_) => header.push("epr_fidelity".into()),
        None => {}
    }

    let base_grid = cfg.grid;
    let rows: Vec<Vec<String>> = points
        .par_iter()
        .map(|(coords, p)| -> Result<Vec<String>, CliError> {
            let r = rates_or_config_error(p)?;
            let mut row: Vec<String> = coords.iter().map(|v| format_number(*v)).collect();
            for v in [p.kappa, p.gamma_e0, p.gamma_10, r.xi, r.xi_squared(), r.gamma_c, r.gamma_e, r.loss_product()] {
                row.push(format_number(v));
            }
            row.push(r.strong_coupling.to_string());
            let grid_for = |end: f64| -> Result<TimeGrid, CliError> {
                let g = TimeGrid {
                    t_start: base_grid.t_start,
                    t_end: base_grid.t_end.unwrap_or(base_grid.t_start + end),
                    n_samples: base_grid.n_samples,
                    dt_max: base_grid.dt_max,
                };
                g.validate()?;
                Ok(g)
            };
            match dynamic {
                Some(ScenarioKind::Transfer) => {
                    let (alpha, beta) = transfer_amplitudes(cfg)?;
                    let (_, post, pre) =
                        transfer_point(p, cfg.model, &grid_for(r.t_transfer)?, alpha, beta, plan.solver)?;
                    row.push(format_number(post));
                    row.push(format_number(pre));
                }
                Some(_) => {
                    let label = named_label(cfg, "10")?;
                    let sys = ModelSystem::build(p, cfg.model)?;
                    let ev = evolve_system(&sys, &[(label.as_str(), ONE)], &grid_for(r.t_entangle)?, &[], plan.solver)?;
                    let f = analysis::fidelity(&crate::model::pair_density(&ev.final_state)?, &analysis::epr_target()?)?;
                    row.push(format_number(f));
                }
                None => {}
            }
            Ok(row)
        })
        .collect::<Result<_, CliError>>()?;

    let mut csv = header.join(",");
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    let mut meta = plan.meta(plan.params);
    meta.results.insert("n_points".into(), json!(rows.len()));
    meta.results.insert(
        "axes".into(),
        Value::Array(
            axes.iter()
                .map(|a| json!({"field": a.field.as_str(), "values": a.values}))
                .collect(),
        ),
    );
    if let Some(k) = axes.iter().position(|a| a.field == SweepField::KappaScale) {
        meta.results.insert("kappa_scale_axis".into(), json!(k));
    }
    Ok(RunOutput { table_kind: "sweep", csv, meta })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(json: &str) -> ScenarioConfig {
        ScenarioConfig::from_json(json).unwrap()
    }

    #[test]
    fn lossless_entangle_reaches_epr_state_under_raman_model() {
        let c = cfg(r#"{"schema_version": 1, "scenario": "entangle", "model": "effective_raman",
                        "params": {"dimensionless": {}}, "solver": {"kind": "unitary"}, "output": "e"}"#);
        let out = run(&c, None).unwrap();
        let f = out.meta.results["epr_fidelity"].as_f64().unwrap();
        assert!((f - 1.0).abs() < 1e-4, "{f}");
        assert!(out.csv.starts_with("t,P10,P01,P+,P-,P00\n"), "{}", out.csv.lines().next().unwrap());
    }

    #[test]
    fn decay_check_matches_closed_form() {
        let c = cfg(r#"{"schema_version": 1, "scenario": "decay_check",
                        "params": {"dimensionless": {"gamma_e0": 0.02, "gamma_e1": 0.01, "kappa": 0.05}},
                        "grid": {"n_samples": 51}, "output": "d"}"#);
        let out = run(&c, None).unwrap();
        assert!(out.meta.results["max_abs_error"].as_f64().unwrap() < 1e-4);
        assert!(out.csv.starts_with("t,Pe,Pe_exact,n,n_exact\n"));
    }

    #[test]
    fn sweep_scenarios_need_sweep_command() {
        let c = cfg(r#"{"schema_version": 1, "scenario": "regime_map", "params": {"dimensionless": {"kappa": 1e-3}},
                        "sweep": {"axes": [{"field": "kappa_scale", "values": [1, 10]}]}, "output": "r"}"#);
        assert!(matches!(run(&c, None), Err(CliError::Config(_))));
        let out = sweep(&c, None).unwrap();
        let lines: Vec<&str> = out.csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("kappa_scale,kappa,"));
    }

    #[test]
    fn seed_override_reaches_solver() {
        let c = cfg(r#"{"schema_version": 1, "scenario": "decay_check", "params": {"dimensionless": {"gamma_e0": 0.05}},
                        "solver": {"kind": "mcwf", "n_traj": 4, "seed0": 1}, "grid": {"n_samples": 5}, "output": "d"}"#);
        let a = run(&c, Some(9)).unwrap();
        assert_eq!(a.meta.seed, 9);
        assert_eq!(a.meta.solver, SolverSpec::Mcwf { n_traj: 4, seed0: 9 });
    }
}

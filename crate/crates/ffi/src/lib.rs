//! C interface to the `nv-wgm` simulator.
//!
//! Every function returns an [`NvwStatus`]; on failure the message is kept
//! per thread and read back with [`nvw_last_error_message`]. Handles are
//! opaque and owned by the caller once created.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nv_wgm::analysis::{self, SweepField};
use nv_wgm::cli::{self, RunOutput, ScenarioConfig};
use nv_wgm::dynamics::{evolve_master, evolve_unitary, TimeGrid};
use nv_wgm::hilbert::{DensityMatrix, C64};
use nv_wgm::model::{effective_rates, ModelKind, ModelSystem, SystemParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NvwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Trace or positivity check failed during integration.
    Numerical = 3,
    Panic = 4,
    BufferTooSmall = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NvwModel {
    FullCavity = 0,
    NineLevel = 1,
    DressedLambda = 2,
    EffectiveRaman = 3,
}

impl From<NvwModel> for ModelKind {
    fn from(m: NvwModel) -> Self {
        match m {
            NvwModel::FullCavity => ModelKind::FullCavity,
            NvwModel::NineLevel => ModelKind::NineLevel,
            NvwModel::DressedLambda => ModelKind::DressedLambda,
            NvwModel::EffectiveRaman => ModelKind::EffectiveRaman,
        }
    }
}

/// Effective rates in units of g.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NvwRates {
    pub theta: f64,
    pub xi: f64,
    pub gamma_c: f64,
    pub gamma_e: f64,
    pub excited_occupation: f64,
    pub t_entangle: f64,
    pub t_transfer: f64,
    pub strong_coupling: bool,
}

/// Opaque parameter set.
pub struct NvwParams {
    inner: SystemParams,
}

/// Opaque result of a config-driven run.
pub struct NvwRun {
    csv: String,
    meta_json: String,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

struct Failure(NvwStatus, String);

impl From<nv_wgm::Error> for Failure {
    fn from(e: nv_wgm::Error) -> Self {
        let status = if e.is_numerical() { NvwStatus::Numerical } else { NvwStatus::InvalidArgument };
        Failure(status, e.to_string())
    }
}

impl From<cli::CliError> for Failure {
    fn from(e: cli::CliError) -> Self {
        match e {
            cli::CliError::Model(m) => m.into(),
            other => Failure(NvwStatus::InvalidArgument, other.to_string()),
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(NvwStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NvwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            NvwStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            NvwStatus::Panic
        }
    }
}

unsafe fn c_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    // SAFETY: caller passes a NUL-terminated string
    unsafe { CStr::from_ptr(s) }
        .to_str()
        .map_err(|_| Failure(NvwStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn params_ref<'a>(p: *const NvwParams) -> Result<&'a SystemParams, Failure> {
    // SAFETY: non-null handles come from nvw_params_new_default
    unsafe { p.as_ref() }.map(|p| &p.inner).ok_or_else(|| null("params"))
}

/// Copies `text` plus a NUL into `buf`. `written` receives the byte count
/// needed including the NUL, also when the buffer is too small.
unsafe fn copy_out(text: &str, buf: *mut c_char, len: usize, written: *mut usize) -> Result<(), Failure> {
    let needed = text.len() + 1;
    if !written.is_null() {
        // SAFETY: checked non-null
        unsafe { *written = needed };
    }
    if buf.is_null() {
        return Err(null("buf"));
    }
    if len < needed {
        return Err(Failure(NvwStatus::BufferTooSmall, format!("need {needed} bytes, got {len}")));
    }
    // SAFETY: buf holds at least `needed` bytes
    unsafe {
        ptr::copy_nonoverlapping(text.as_ptr(), buf.cast::<u8>(), text.len());
        *buf.add(text.len()) = 0;
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nvw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread (empty after success).
///
/// # Safety
/// `buf` must hold `len` writable bytes; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn nvw_last_error_message(buf: *mut c_char, len: usize, written: *mut usize) -> NvwStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    match unsafe { copy_out(&msg, buf, len, written) } {
        Ok(()) => NvwStatus::Ok,
        Err(Failure(s, _)) => s,
    }
}

/// Default parameters (Δ = 10g, Ω = 0.01g, lossless); null on allocation panic.
#[no_mangle]
pub extern "C" fn nvw_params_new_default() -> *mut NvwParams {
    catch_unwind(|| Box::into_raw(Box::new(NvwParams { inner: SystemParams::default() }))).unwrap_or(ptr::null_mut())
}

/// # Safety
/// `p` must come from `nvw_params_new_default` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nvw_params_free(p: *mut NvwParams) {
    if !p.is_null() {
        // SAFETY: ownership returns from the caller
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Sets one field by name (`g1`, `delta`, `kappa`, `gamma`, `kappa_scale`, ...).
/// The handle is left unchanged if the result would be invalid.
///
/// # Safety
/// `p` is a live handle; `name` is a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nvw_params_set(p: *mut NvwParams, name: *const c_char, value: f64) -> NvwStatus {
    guard(|| {
        // SAFETY: see function contract
        let handle = unsafe { p.as_mut() }.ok_or_else(|| null("params"))?;
        let field: SweepField = unsafe { c_str(name, "name") }?.parse()?;
        let next = field.apply(&handle.inner, value);
        next.validate()?;
        handle.inner = next;
        Ok(())
    })
}

/// # Safety
/// `p` is a live handle; `out` points to writable storage.
#[no_mangle]
pub unsafe extern "C" fn nvw_effective_rates(p: *const NvwParams, out: *mut NvwRates) -> NvwStatus {
    guard(|| {
        let params = unsafe { params_ref(p) }?;
        let out = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        let r = effective_rates(params)?;
        *out = NvwRates {
            theta: r.theta,
            xi: r.xi,
            gamma_c: r.gamma_c,
            gamma_e: r.gamma_e,
            excited_occupation: r.excited_occupation,
            t_entangle: r.t_entangle,
            t_transfer: r.t_transfer,
            strong_coupling: r.strong_coupling,
        };
        Ok(())
    })
}

/// Transfers `α|0⟩ + β|1⟩` from emitter 1 to emitter 2 over `ξt = π/2` and
/// reports the fidelity after the phase gate and before it.
///
/// # Safety
/// `p` is a live handle; the output pointers are writable (either may be null).
#[no_mangle]
pub unsafe extern "C" fn nvw_transfer_fidelity(
    p: *const NvwParams,
    model: NvwModel,
    alpha_re: f64,
    alpha_im: f64,
    beta_re: f64,
    beta_im: f64,
    fidelity: *mut f64,
    fidelity_pre_gate: *mut f64,
) -> NvwStatus {
    guard(|| {
        let params = unsafe { params_ref(p) }?;
        let (alpha, beta) = (C64::new(alpha_re, alpha_im), C64::new(beta_re, beta_im));
        let input = analysis::transfer_input(alpha, beta)?;
        let sys = ModelSystem::build(params, model.into())?;
        let grid = TimeGrid::new(0.0, effective_rates(params)?.t_transfer, 2)?;
        let psi0 = sys.state(&input)?;
        let rho = if sys.is_lossless() {
            DensityMatrix::from_pure(&evolve_unitary(&sys.hamiltonian, &psi0, &grid, &[])?.final_state)
        } else {
            evolve_master(&sys.hamiltonian, &sys.channels, &DensityMatrix::from_pure(&psi0), &grid, &[])?.final_state
        };
        let post = analysis::transfer_fidelity(alpha, beta, &rho)?;
        let pre = analysis::transfer_fidelity_pre_gate(alpha, beta, &rho)?;
        if let Some(f) = unsafe { fidelity.as_mut() } {
            *f = post;
        }
        if let Some(f) = unsafe { fidelity_pre_gate.as_mut() } {
            *f = pre;
        }
        Ok(())
    })
}

/// Runs a JSON scenario config (single run or sweep, by scenario) without
/// touching the filesystem. `seed` overrides the config when `has_seed`.
///
/// # Safety
/// `config_json` is NUL-terminated; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn nvw_run_config(
    config_json: *const c_char,
    has_seed: bool,
    seed: u64,
    out: *mut *mut NvwRun,
) -> NvwStatus {
    guard(|| {
        let slot = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
        *slot = ptr::null_mut();
        let cfg = ScenarioConfig::from_json(unsafe { c_str(config_json, "config_json") }?)?;
        let seed = has_seed.then_some(seed);
        let RunOutput { csv, meta, .. } =
            if cfg.scenario.is_sweep() { cli::sweep(&cfg, seed)? } else { cli::run(&cfg, seed)? };
        let meta_json = serde_json::to_string_pretty(&meta)
            .map_err(|e| Failure(NvwStatus::InvalidArgument, e.to_string()))?;
        *slot = Box::into_raw(Box::new(NvwRun { csv, meta_json }));
        Ok(())
    })
}

/// CSV table of a run, NUL-terminated. `written` receives the size needed
/// including the NUL; a short `len` gives `BufferTooSmall` and writes nothing.
///
/// # Safety
/// `run` is a live handle; `buf` holds `len` writable bytes; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn nvw_run_csv(run: *const NvwRun, buf: *mut c_char, len: usize, written: *mut usize) -> NvwStatus {
    guard(|| {
        let run = unsafe { run.as_ref() }.ok_or_else(|| null("run"))?;
        unsafe { copy_out(&run.csv, buf, len, written) }
    })
}

/// Metadata record of a run as JSON.
///
/// # Safety
/// As for [`nvw_run_csv`].
#[no_mangle]
pub unsafe extern "C" fn nvw_run_meta_json(
    run: *const NvwRun,
    buf: *mut c_char,
    len: usize,
    written: *mut usize,
) -> NvwStatus {
    guard(|| {
        let run = unsafe { run.as_ref() }.ok_or_else(|| null("run"))?;
        unsafe { copy_out(&run.meta_json, buf, len, written) }
    })
}

/// # Safety
/// `run` must come from `nvw_run_config` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nvw_run_free(run: *mut NvwRun) {
    if !run.is_null() {
        // SAFETY: ownership returns from the caller
        drop(unsafe { Box::from_raw(run) });
    }
}

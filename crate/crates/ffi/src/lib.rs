//! C interface to the `maxwell-demon` simulator.
//!
//! Handles are opaque and owned by the caller once returned; release them
//! with the matching `*_free` function. Every entry point returns a
//! [`DemonStatus`]; on failure the message is available from
//! [`demon_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use maxwell_demon::dynamics::{run_stages, ImperfectionSpec};
use maxwell_demon::experiment::{bootstrap_errors, delta_beta_tilde_grid, estimate_report, monte_carlo, sweep, SweepResult};
use maxwell_demon::statespace::{ThermalSpec, DEFAULT_N_MAX};
use maxwell_demon::thermo::{slt_report, ThermoReport};
use maxwell_demon::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemonStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The photon cutoff is too small for the requested temperature.
    Truncation = 3,
    Numeric = 4,
    Panic = 5,
}

/// Protocol parameters. Created by [`demon_config_new`].
pub struct DemonConfig {
    p_e: f64,
    n_th: f64,
    n_max: usize,
    demon: bool,
    ideal: bool,
    imperfections: ImperfectionSpec,
}

impl DemonConfig {
    fn spec(&self) -> maxwell_demon::Result<ThermalSpec> {
        ThermalSpec::new(self.p_e, self.n_th, self.n_max)
    }

    fn imperfections(&self) -> ImperfectionSpec {
        if self.ideal {
            ImperfectionSpec {
                readout_loss: false,
                atom_relaxation: false,
                cavity_relaxation: false,
                detection_error: false,
                detection_loss: false,
                ..self.imperfections
            }
        } else {
            self.imperfections
        }
    }
}

/// Result of [`demon_sweep`].
pub struct DemonSweep {
    inner: SweepResult,
}

/// Flat copy of the main report quantities, in nats and photons.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DemonReport {
    pub demon_on: bool,
    pub p_e: f64,
    pub n_th: f64,
    pub delta_beta: f64,
    pub delta_beta_tilde: f64,
    pub heat_q: f64,
    pub heat_c: f64,
    pub mean_photon_number: f64,
    pub i_qc_d_readout: f64,
    pub i_qc_d_feedback: f64,
    pub delta_i_qc_d: f64,
    pub delta_s_qdc: f64,
    pub d_q: f64,
    pub d_c: f64,
    pub d_qc: f64,
    pub entropy_production: f64,
    pub generalized_slt: f64,
    pub residual: f64,
    pub heat_gain: f64,
}

const REPORT_FIELDS: [&str; 18] = [
    "p_e",
    "n_th",
    "delta_beta",
    "delta_beta_tilde",
    "heat_q",
    "heat_c",
    "feedback.mean_photon_number",
    "readout.i_qc_d",
    "feedback.i_qc_d",
    "delta_i_qc_d",
    "delta_s_qdc",
    "d_q",
    "d_c",
    "d_qc",
    "entropy_production",
    "generalized_slt",
    "residual",
    "heat_gain",
];

impl DemonReport {
    fn from_lookup(demon_on: bool, get: impl Fn(&str) -> f64) -> Self {
        let v: Vec<f64> = REPORT_FIELDS.iter().map(|f| get(f)).collect();
        DemonReport {
            demon_on,
            p_e: v[0],
            n_th: v[1],
            delta_beta: v[2],
            delta_beta_tilde: v[3],
            heat_q: v[4],
            heat_c: v[5],
            mean_photon_number: v[6],
            i_qc_d_readout: v[7],
            i_qc_d_feedback: v[8],
            delta_i_qc_d: v[9],
            delta_s_qdc: v[10],
            d_q: v[11],
            d_c: v[12],
            d_qc: v[13],
            entropy_production: v[14],
            generalized_slt: v[15],
            residual: v[16],
            heat_gain: v[17],
        }
    }

    fn from_report(r: &ThermoReport) -> Self {
        let fields = r.scalar_fields();
        DemonReport::from_lookup(r.demon_on, |name| {
            fields.iter().find(|(n, _)| *n == name).map_or(f64::NAN, |(_, v)| *v)
        })
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> DemonStatus {
    match err {
        Error::Truncation { .. } | Error::SwapOverflow { .. } => DemonStatus::Truncation,
        Error::SweepPoint { source, .. } => status_of(source),
        Error::InvalidParameter { .. } | Error::Config { .. } | Error::EmptyTable | Error::DegenerateTable { .. } => {
            DemonStatus::InvalidArgument
        }
        _ => DemonStatus::Numeric,
    }
}

enum Failure {
    Status(DemonStatus, String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn null() -> Failure {
    Failure::Status(DemonStatus::NullPointer, "null pointer argument".into())
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure::Status(DemonStatus::InvalidArgument, message.into())
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> DemonStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => DemonStatus::Ok,
        Ok(Err(Failure::Status(status, message))) => {
            set_last_error(message);
            status
        }
        Ok(Err(Failure::Core(err))) => {
            set_last_error(err.to_string());
            status_of(&err)
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal panic: {message}"));
            DemonStatus::Panic
        }
    }
}

unsafe fn config_ref<'a>(cfg: *const DemonConfig) -> Result<&'a DemonConfig, Failure> {
    cfg.as_ref().ok_or_else(null)
}

unsafe fn config_mut<'a>(cfg: *mut DemonConfig) -> Result<&'a mut DemonConfig, Failure> {
    cfg.as_mut().ok_or_else(null)
}

/// New configuration with the default parameters. Never returns null.
#[no_mangle]
pub extern "C" fn demon_config_new() -> *mut DemonConfig {
    Box::into_raw(Box::new(DemonConfig {
        p_e: 0.5,
        n_th: 0.63,
        n_max: DEFAULT_N_MAX,
        demon: true,
        ideal: false,
        imperfections: ImperfectionSpec::default(),
    }))
}

/// # Safety
/// `cfg` must come from [`demon_config_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn demon_config_free(cfg: *mut DemonConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Sets a numeric parameter by name: `p_e`, `n_th`, `n_max`, `eta_readout`,
/// `t_flight`, `t_atom`, `t_cav`, `n_env`, `eps_det`, `p_det`, `relax_split`.
///
/// # Safety
/// `cfg` must be a live handle and `key` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn demon_config_set_f64(cfg: *mut DemonConfig, key: *const c_char, value: f64) -> DemonStatus {
    guard(|| {
        let cfg = config_mut(cfg)?;
        if key.is_null() {
            return Err(null());
        }
        let key = CStr::from_ptr(key).to_str().map_err(|_| invalid("key is not UTF-8"))?;
        let mut next = cfg.imperfections;
        match key {
            "p_e" => {
                ThermalSpec::new(value, cfg.n_th, cfg.n_max)?;
                cfg.p_e = value;
                return Ok(());
            }
            "n_th" => {
                ThermalSpec::new(cfg.p_e, value, cfg.n_max)?;
                cfg.n_th = value;
                return Ok(());
            }
            "n_max" => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= 10_000.0) {
                    return Err(invalid(format!("n_max must be a positive integer, got {value}")));
                }
                cfg.n_max = value as usize;
                return Ok(());
            }
            "eta_readout" => next.eta_readout = value,
            "t_flight" => next.t_flight = value,
            "t_atom" => next.t_atom = value,
            "t_cav" => next.t_cav = value,
            "n_env" => next.n_env = value,
            "eps_det" => next.eps_det = value,
            "p_det" => next.p_det = value,
            "relax_split" => next.relax_split = value,
            other => return Err(invalid(format!("unknown parameter `{other}`"))),
        }
        next.validate()?;
        cfg.imperfections = next;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn demon_config_set_demon(cfg: *mut DemonConfig, demon_on: bool) -> DemonStatus {
    guard(|| {
        config_mut(cfg)?.demon = demon_on;
        Ok(())
    })
}

/// Switches every imperfection channel off (or back on).
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn demon_config_set_ideal(cfg: *mut DemonConfig, ideal: bool) -> DemonStatus {
    guard(|| {
        config_mut(cfg)?.ideal = ideal;
        Ok(())
    })
}

/// Runs the protocol once and writes the report to `out`.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn demon_run(cfg: *const DemonConfig, out: *mut DemonReport) -> DemonStatus {
    guard(|| {
        let cfg = config_ref(cfg)?;
        let out = out.as_mut().ok_or_else(null)?;
        let spec = cfg.spec()?;
        let report = slt_report(&run_stages(&spec, &cfg.imperfections(), cfg.demon)?, &spec)?;
        *out = DemonReport::from_report(&report);
        Ok(())
    })
}

/// Demon and no-demon runs over `points` values of `delta_beta_tilde`
/// evenly spaced in `[-span, span]`. `p_e` of `cfg` is ignored.
///
/// # Safety
/// `cfg` must be a live handle and `out` writable. Release the result with
/// [`demon_sweep_free`].
#[no_mangle]
pub unsafe extern "C" fn demon_sweep(
    cfg: *const DemonConfig,
    points: usize,
    span: f64,
    out: *mut *mut DemonSweep,
) -> DemonStatus {
    guard(|| {
        let cfg = config_ref(cfg)?;
        let out = out.as_mut().ok_or_else(null)?;
        if points == 0 || !span.is_finite() || span <= 0.0 {
            return Err(invalid("need points >= 1 and a positive finite span"));
        }
        let grid = delta_beta_tilde_grid(cfg.n_th, points, span);
        let inner = sweep(&grid, cfg.n_th, cfg.n_max, &cfg.imperfections())?;
        *out = Box::into_raw(Box::new(DemonSweep { inner }));
        Ok(())
    })
}

/// Number of grid points; 0 for a null handle.
///
/// # Safety
/// `sweep` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn demon_sweep_len(sweep: *const DemonSweep) -> usize {
    sweep.as_ref().map_or(0, |s| s.inner.points.len())
}

/// Report at grid `index`, ordered by increasing `delta_beta_tilde`.
///
/// # Safety
/// `sweep` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn demon_sweep_get(
    sweep: *const DemonSweep,
    index: usize,
    demon_on: bool,
    out: *mut DemonReport,
) -> DemonStatus {
    guard(|| {
        let sweep = sweep.as_ref().ok_or_else(null)?;
        let out = out.as_mut().ok_or_else(null)?;
        let point = sweep
            .inner
            .points
            .get(index)
            .ok_or_else(|| invalid(format!("index {index} out of range")))?;
        *out = DemonReport::from_report(if demon_on { &point.demon } else { &point.no_demon });
        Ok(())
    })
}

/// # Safety
/// `sweep` must come from [`demon_sweep`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn demon_sweep_free(sweep: *mut DemonSweep) {
    if !sweep.is_null() {
        drop(Box::from_raw(sweep));
    }
}

/// Finite-shot emulation. Writes plug-in estimates to `estimate` and their
/// bootstrap standard errors (same field layout) to `std_error`, which may
/// be null.
///
/// # Safety
/// `cfg` must be a live handle; `estimate` writable; `std_error` null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn demon_mc_estimate(
    cfg: *const DemonConfig,
    shots: u64,
    seed: u64,
    resamples: usize,
    estimate: *mut DemonReport,
    std_error: *mut DemonReport,
) -> DemonStatus {
    guard(|| {
        let cfg = config_ref(cfg)?;
        let estimate = estimate.as_mut().ok_or_else(null)?;
        let spec = cfg.spec()?;
        let run = monte_carlo(&spec, &cfg.imperfections(), cfg.demon, shots, seed)?;
        let report = estimate_report(&run)?;
        if let Some(se_out) = std_error.as_mut() {
            let se = bootstrap_errors(&run, resamples, seed)?;
            *se_out = DemonReport::from_lookup(cfg.demon, |name| se.get(name).unwrap_or(0.0));
        }
        *estimate = DemonReport::from_report(&report);
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn demon_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn demon_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}

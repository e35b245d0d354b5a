//! C ABI over `catalyq`. States and reports live behind opaque handles that
//! the caller releases with the matching `_free` function. Every call returns
//! a [`CatalyqStatus`]; on failure `catalyq_last_error` describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use catalyq::catalyst::{run_theorem1, run_theorem3};
use catalyq::divergences::{hypothesis_testing_divergence, kl_divergence_with, renyi_inf_with};
use catalyq::experiments::toy_example;
use catalyq::qops::json::{state_from_str, to_string};
use catalyq::qops::{gibbs_state, DensityOperator, GibbsContext, HermitianOperator};
use catalyq::{Error, Tolerances};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CatalyqStatus {
    Ok = 0,
    NullPointer = 1,
    Argument = 2,
    Dimension = 3,
    Invariant = 4,
    SizeCap = 5,
    Construction = 6,
    CopiesInsufficient = 7,
    Refused = 8,
    Numerical = 9,
    Io = 10,
    Json = 11,
    Utf8 = 12,
    Panic = 13,
}

impl From<&Error> for CatalyqStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Dimension(_) => CatalyqStatus::Dimension,
            Error::Argument(_) => CatalyqStatus::Argument,
            Error::Invariant(_) => CatalyqStatus::Invariant,
            Error::SizeCap { .. } => CatalyqStatus::SizeCap,
            Error::Construction { .. } => CatalyqStatus::Construction,
            Error::CopiesInsufficient { .. } => CatalyqStatus::CopiesInsufficient,
            Error::Refused(_) => CatalyqStatus::Refused,
            Error::Numerical(_) => CatalyqStatus::Numerical,
            Error::Io(_) => CatalyqStatus::Io,
            Error::Json(_) => CatalyqStatus::Json,
        }
    }
}

/// A density operator.
pub struct CatalyqState(DensityOperator);

/// A finished run: its JSON report and whether every check passed.
pub struct CatalyqReport {
    passed: bool,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

struct Failure(CatalyqStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(CatalyqStatus::from(&e), e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(CatalyqStatus::NullPointer, format!("{name} is null"))
}

/// Runs `f`, turning errors and panics into a status plus the last-error text.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CatalyqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CatalyqStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CatalyqStatus::Panic
        }
    }
}

unsafe fn state_ref<'a>(p: *const CatalyqState, name: &str) -> Result<&'a DensityOperator, Failure> {
    p.as_ref().map(|s| &s.0).ok_or_else(|| null(name))
}

unsafe fn write<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

fn report_from<T: serde::Serialize>(passed: bool, r: &T) -> Result<*mut CatalyqReport, Failure> {
    let text = serde_json::to_string(r).map_err(Error::from)?;
    let json = CString::new(text).map_err(|_| Failure(CatalyqStatus::Json, "report contains a NUL byte".into()))?;
    Ok(Box::into_raw(Box::new(CatalyqReport { passed, json })))
}

/// Message for the most recent failed call on this thread; empty after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn catalyq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a state in the `{"dims":[..],"matrix":[[[re,im],..],..]}` format.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catalyq_state_from_json(json: *const c_char, out: *mut *mut CatalyqState) -> CatalyqStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|_| Failure(CatalyqStatus::Utf8, "json is not UTF-8".into()))?;
        let s = state_from_str(text, &Tolerances::DEFAULT)?;
        write(out, Box::into_raw(Box::new(CatalyqState(s))), "out")
    })
}

/// A diagonal state from `len` probabilities.
///
/// # Safety
/// `probs` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catalyq_state_diagonal(probs: *const f64, len: usize, out: *mut *mut CatalyqState) -> CatalyqStatus {
    guard(|| {
        if probs.is_null() {
            return Err(null("probs"));
        }
        let p = std::slice::from_raw_parts(probs, len);
        let s = DensityOperator::diagonal(p)?;
        write(out, Box::into_raw(Box::new(CatalyqState(s))), "out")
    })
}

/// The thermal state of a diagonal Hamiltonian with the given energies.
///
/// # Safety
/// `energies` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catalyq_gibbs_state(
    energies: *const f64,
    len: usize,
    beta: f64,
    out: *mut *mut CatalyqState,
) -> CatalyqStatus {
    guard(|| {
        if energies.is_null() {
            return Err(null("energies"));
        }
        let e = std::slice::from_raw_parts(energies, len);
        let ctx = gibbs_state(&HermitianOperator::diagonal(e), beta)?;
        write(out, Box::into_raw(Box::new(CatalyqState(ctx.gibbs))), "out")
    })
}

/// # Safety
/// `state` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn catalyq_state_free(state: *mut CatalyqState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catalyq_state_dim(state: *const CatalyqState, out: *mut usize) -> CatalyqStatus {
    guard(|| {
        let s = state_ref(state, "state")?;
        write(out, catalyq::qops::Operator::dim(s), "out")
    })
}

/// Serializes a state; release the string with [`catalyq_string_free`].
///
/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catalyq_state_to_json(state: *const CatalyqState, out: *mut *mut c_char) -> CatalyqStatus {
    guard(|| {
        let s = state_ref(state, "state")?;
        let c = CString::new(to_string(s)).map_err(|_| Failure(CatalyqStatus::Json, "NUL in output".into()))?;
        write(out, c.into_raw(), "out")
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn catalyq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `S₁(a‖b)` in nats; infinite when `a` leaves the support of `b`.
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catalyq_kl_divergence(
    a: *const CatalyqState,
    b: *const CatalyqState,
    out: *mut f64,
) -> CatalyqStatus {
    guard(|| {
        let v = kl_divergence_with(state_ref(a, "a")?, state_ref(b, "b")?, &Tolerances::DEFAULT)?;
        write(out, v.value, "out")
    })
}

/// `S_∞(a‖b)` in nats.
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catalyq_renyi_inf(a: *const CatalyqState, b: *const CatalyqState, out: *mut f64) -> CatalyqStatus {
    guard(|| {
        let v = renyi_inf_with(state_ref(a, "a")?, state_ref(b, "b")?, &Tolerances::DEFAULT)?;
        write(out, v.value, "out")
    })
}

/// `S_H^{1-eps}(a‖b)` in nats.
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catalyq_hypothesis_divergence(
    a: *const CatalyqState,
    b: *const CatalyqState,
    eps: f64,
    out: *mut f64,
) -> CatalyqStatus {
    guard(|| {
        let v = hypothesis_testing_divergence(state_ref(a, "a")?, state_ref(b, "b")?, eps)?;
        write(out, v, "out")
    })
}

/// Catalytic conversion `rho → rho_p` by Gibbs-preserving maps for `gibbs`.
///
/// # Safety
/// All handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catalyq_convert_free_energy(
    rho: *const CatalyqState,
    rho_p: *const CatalyqState,
    gibbs: *const CatalyqState,
    beta: f64,
    eps: f64,
    delta: f64,
    n_max: usize,
    out: *mut *mut CatalyqReport,
) -> CatalyqStatus {
    guard(|| {
        let ctx = GibbsContext::from_state(state_ref(gibbs, "gibbs")?.clone(), beta)?;
        let tol = Tolerances::DEFAULT;
        let r = run_theorem1(state_ref(rho, "rho")?, state_ref(rho_p, "rho_p")?, &ctx, eps, delta, n_max, &tol)?;
        write(out, report_from(r.passed, &r)?, "out")
    })
}

/// Catalytic conversion of the pair `(rho, eta)` into `(rho_p, eta_p)`.
///
/// # Safety
/// All handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catalyq_convert_relative(
    rho: *const CatalyqState,
    rho_p: *const CatalyqState,
    eta: *const CatalyqState,
    eta_p: *const CatalyqState,
    eps: f64,
    delta: f64,
    n_max: usize,
    out: *mut *mut CatalyqReport,
) -> CatalyqStatus {
    guard(|| {
        let r = run_theorem3(
            state_ref(rho, "rho")?,
            state_ref(rho_p, "rho_p")?,
            state_ref(eta, "eta")?,
            state_ref(eta_p, "eta_p")?,
            eps,
            delta,
            n_max,
            &Tolerances::DEFAULT,
        )?;
        write(out, report_from(r.passed, &r)?, "out")
    })
}

/// The eight-copy qubit example.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catalyq_toy_example(out: *mut *mut CatalyqReport) -> CatalyqStatus {
    guard(|| {
        let r = toy_example(&Tolerances::DEFAULT)?;
        write(out, report_from(r.all_pass, &r)?, "out")
    })
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn catalyq_report_passed(report: *const CatalyqReport, out: *mut bool) -> CatalyqStatus {
    guard(|| {
        let r = report.as_ref().ok_or_else(|| null("report"))?;
        write(out, r.passed, "out")
    })
}

/// The report as JSON, owned by the handle and valid until it is freed.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn catalyq_report_json(report: *const CatalyqReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

/// # Safety
/// `report` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn catalyq_report_free(report: *mut CatalyqReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

//! C ABI over the `symmix` library.
//!
//! Objects are opaque handles created by `*_new`-style functions and released
//! with the matching `*_free`. Fallible calls return a [`SymmixStatus`] and
//! write results through out-pointers; on failure
//! [`symmix_last_error`] describes the error for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use symmix::comparator::{fit_nmle, EmOptions};
use symmix::deconvolve::estimate_g0;
use symmix::identifiability::{verdict, Reason};
use symmix::objective::dn;
use symmix::optimize::{fit_general, FitOptions, FitResult};
use symmix::{Error, MixtureParams, Sample, StepFunction};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmixStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    FitFailed = 3,
    /// The mixing weight is too close to 1/2 to recover the component distribution.
    Singular = 4,
    Panic = 5,
}

/// Identifiability verdict tags.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmixReason {
    Ok = 0,
    ZeroWeight = 1,
    Symmetric = 2,
    LambdaHalf = 3,
    CaseA2 = 4,
    CaseA3 = 5,
    CaseA4 = 6,
    CaseA5 = 7,
    ReflectedCase = 8,
    UnsupportedK = 9,
}

impl From<Reason> for SymmixReason {
    fn from(r: Reason) -> Self {
        match r {
            Reason::Ok => Self::Ok,
            Reason::ZeroWeight => Self::ZeroWeight,
            Reason::Symmetric => Self::Symmetric,
            Reason::LambdaHalf => Self::LambdaHalf,
            Reason::CaseA2 => Self::CaseA2,
            Reason::CaseA3 => Self::CaseA3,
            Reason::CaseA4 => Self::CaseA4,
            Reason::CaseA5 => Self::CaseA5,
            Reason::ReflectedCase => Self::ReflectedCase,
            Reason::UnsupportedK => Self::UnsupportedK,
        }
    }
}

/// A sorted sample of observations.
pub struct SymmixSample(Sample);

/// A fitted mixture.
pub struct SymmixFit(FitResult);

/// A right-continuous step function.
pub struct SymmixStepFn(StepFunction);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl ToString) {
    let text = msg.to_string().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).expect("NUL bytes removed"));
}

fn status_of(e: &Error) -> SymmixStatus {
    match e {
        Error::NonInvertibleMixing(_) => SymmixStatus::Singular,
        Error::AllStartsFailed
        | Error::NonFiniteStart
        | Error::TooFewObservations { .. }
        | Error::BootstrapFailed { .. } => SymmixStatus::FitFailed,
        _ => SymmixStatus::InvalidArgument,
    }
}

/// Runs `body`, recording errors and turning panics into [`SymmixStatus::Panic`].
fn guard(body: impl FnOnce() -> Result<(), (SymmixStatus, String)>) -> SymmixStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            SymmixStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SymmixStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (SymmixStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (SymmixStatus, String) {
    (SymmixStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or point to `len` readable doubles.
unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], (SymmixStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` must be null or a valid handle.
unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (SymmixStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn symmix_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a sample from `len` finite values.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn symmix_sample_new(
    values: *const f64,
    len: usize,
    out: *mut *mut SymmixSample,
) -> SymmixStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let v = slice(values, len, "values")?;
        let s = Sample::new(v.to_vec()).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SymmixSample(s)));
        Ok(())
    })
}

/// The bundled Old Faithful waiting times.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn symmix_sample_faithful(out: *mut *mut SymmixSample) -> SymmixStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(SymmixSample(symmix::data::faithful())));
        Ok(())
    })
}

/// Number of observations, or 0 for a null handle.
///
/// # Safety
/// `sample` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn symmix_sample_len(sample: *const SymmixSample) -> usize {
    sample.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `sample` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn symmix_sample_free(sample: *mut SymmixSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// Asymmetry distance of `sample` at the given parameters; `p` may be `INFINITY`.
///
/// # Safety
/// `weights` and `locations` must point to `k` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn symmix_dn(
    sample: *const SymmixSample,
    weights: *const f64,
    locations: *const f64,
    k: usize,
    p: f64,
    out: *mut f64,
) -> SymmixStatus {
    guard(|| {
        let s = handle(sample, "sample")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let params = MixtureParams::new(slice(weights, k, "weights")?.to_vec(), slice(locations, k, "locations")?.to_vec())
            .map_err(lib_err)?;
        *out = dn(&s.0, &params, p).map_err(lib_err)?;
        Ok(())
    })
}

/// Semiparametric `k`-component fit in `L_p` with the default start protocol.
///
/// # Safety
/// `sample` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn symmix_fit(
    sample: *const SymmixSample,
    k: usize,
    p: f64,
    out: *mut *mut SymmixFit,
) -> SymmixStatus {
    guard(|| {
        let s = handle(sample, "sample")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let opts = FitOptions {
            p,
            ..FitOptions::default()
        };
        let fit = fit_general(&s.0, k, &opts).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SymmixFit(fit)));
        Ok(())
    })
}

/// Number of components, or 0 for a null handle.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn symmix_fit_k(fit: *const SymmixFit) -> usize {
    fit.as_ref().map_or(0, |f| f.0.params.k())
}

/// Copies the fitted weights and increasing locations into arrays of length `k`.
///
/// # Safety
/// `weights` and `locations` must point to `k` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn symmix_fit_params(
    fit: *const SymmixFit,
    weights: *mut f64,
    locations: *mut f64,
    k: usize,
) -> SymmixStatus {
    guard(|| {
        let f = handle(fit, "fit")?;
        if weights.is_null() || locations.is_null() {
            return Err(null("output array"));
        }
        let p = &f.0.params;
        if k != p.k() {
            return Err((SymmixStatus::InvalidArgument, format!("fit has {} components, not {k}", p.k())));
        }
        ptr::copy_nonoverlapping(p.weights().as_ptr(), weights, k);
        ptr::copy_nonoverlapping(p.locations().as_ptr(), locations, k);
        Ok(())
    })
}

/// Distance at the optimum, or NaN for a null handle.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn symmix_fit_objective(fit: *const SymmixFit) -> f64 {
    fit.as_ref().map_or(f64::NAN, |f| f.0.objective)
}

/// Component variance estimate, or NaN when unavailable.
///
/// # Safety
/// `fit` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn symmix_fit_sigma2(fit: *const SymmixFit) -> f64 {
    fit.as_ref().and_then(|f| f.0.sigma2).unwrap_or(f64::NAN)
}

/// # Safety
/// `fit` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn symmix_fit_free(fit: *mut SymmixFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Normal-mixture maximum likelihood; writes `(mu1, mu2, lambda1, sigma2)` to `row`.
///
/// # Safety
/// `sample` must be a live handle; `row` must point to 4 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn symmix_fit_nmle(sample: *const SymmixSample, row: *mut f64) -> SymmixStatus {
    guard(|| {
        let s = handle(sample, "sample")?;
        if row.is_null() {
            return Err(null("row"));
        }
        let r = fit_nmle(&s.0, &EmOptions::default()).map_err(lib_err)?.table_row();
        ptr::copy_nonoverlapping(r.as_ptr(), row, 4);
        Ok(())
    })
}

/// Component CDF estimate for a two-component fit.
///
/// # Safety
/// `sample` and `fit` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn symmix_g0(
    sample: *const SymmixSample,
    fit: *const SymmixFit,
    out: *mut *mut SymmixStepFn,
) -> SymmixStatus {
    guard(|| {
        let s = handle(sample, "sample")?;
        let f = handle(fit, "fit")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let g = estimate_g0(&s.0, &f.0.params).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SymmixStepFn(g.g0)));
        Ok(())
    })
}

/// Value at `t`, or NaN for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn symmix_stepfn_eval(f: *const SymmixStepFn, t: f64) -> f64 {
    f.as_ref().map_or(f64::NAN, |f| f.0.eval(t))
}

/// Number of breakpoints; there is one more level than breakpoints.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn symmix_stepfn_len(f: *const SymmixStepFn) -> usize {
    f.as_ref().map_or(0, |f| f.0.breakpoints().len())
}

/// Copies breakpoints (`len` values) and levels (`len + 1` values).
///
/// # Safety
/// `breakpoints` must hold `len` and `levels` `len + 1` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn symmix_stepfn_copy(
    f: *const SymmixStepFn,
    breakpoints: *mut f64,
    levels: *mut f64,
    len: usize,
) -> SymmixStatus {
    guard(|| {
        let f = handle(f, "step function")?;
        if breakpoints.is_null() || levels.is_null() {
            return Err(null("output array"));
        }
        let b = f.0.breakpoints();
        if len != b.len() {
            return Err((SymmixStatus::InvalidArgument, format!("step function has {} breakpoints, not {len}", b.len())));
        }
        ptr::copy_nonoverlapping(b.as_ptr(), breakpoints, len);
        ptr::copy_nonoverlapping(f.0.levels().as_ptr(), levels, len + 1);
        Ok(())
    })
}

/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn symmix_stepfn_free(f: *mut SymmixStepFn) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Identifiability of `(weights, locations)`; weights are normalized first.
/// Writes 1 to `member` for an identifiable point and 0 otherwise.
///
/// # Safety
/// `weights` and `locations` must point to `k` doubles; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn symmix_identifiable(
    weights: *const f64,
    locations: *const f64,
    k: usize,
    member: *mut i32,
    reason: *mut SymmixReason,
) -> SymmixStatus {
    guard(|| {
        if member.is_null() || reason.is_null() {
            return Err(null("output"));
        }
        let params = MixtureParams::from_proportional(
            slice(weights, k, "weights")?.to_vec(),
            slice(locations, k, "locations")?.to_vec(),
        )
        .map_err(lib_err)?;
        let v = verdict(&params);
        *member = i32::from(v.member);
        *reason = v.reason.into();
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::NonInvertibleMixing(0.5)), SymmixStatus::Singular);
        assert_eq!(status_of(&Error::AllStartsFailed), SymmixStatus::FitFailed);
        assert_eq!(status_of(&Error::UnsupportedK(4)), SymmixStatus::InvalidArgument);
    }

    #[test]
    fn panics_become_status() {
        let st = guard(|| panic!("boom"));
        assert_eq!(st, SymmixStatus::Panic);
        let msg = unsafe { std::ffi::CStr::from_ptr(symmix_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "internal panic");
    }
}

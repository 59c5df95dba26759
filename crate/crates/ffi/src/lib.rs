//! C ABI over the zerovar library.
//!
//! Kernels are opaque handles created from a JSON spec and released with
//! [`zv_kernel_free`]. Every fallible call returns a [`ZvStatus`]; on failure the
//! message is kept per thread and can be copied out with [`zv_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use thiserror::Error;
use zerovar::chaos::verify_all;
use zerovar::mc::{estimate_moments, PathSpec};
use zerovar::spectral::{Kernel, KernelSpec};
use zerovar::variance::{key_integral, variance_chaos, ChaosOptions};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    MalformedSpec = 3,
    UnknownCatalog = 4,
    ParameterOutOfRange = 5,
    InvalidMeasure = 6,
    DegenerateKernel = 7,
    IdentityViolation = 8,
    Budget = 9,
    SizeGuard = 10,
    Unsupported = 11,
    Io = 12,
    Panic = 13,
}

/// Opaque covariance kernel.
pub struct ZvKernel {
    inner: Kernel,
}

/// First two moments of the zero count with their standard errors.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZvMoments {
    pub mean: f64,
    pub mean_se: f64,
    pub var: f64,
    pub var_se: f64,
}

#[derive(Debug, Error)]
enum FfiError {
    #[error("null pointer passed as `{0}`")]
    NullPointer(&'static str),
    #[error("`{0}` is not valid UTF-8")]
    InvalidUtf8(&'static str),
    #[error("{0}")]
    Core(#[from] zerovar::Error),
    #[error("internal panic: {0}")]
    Panic(String),
}

impl FfiError {
    fn status(&self) -> ZvStatus {
        use zerovar::Error as E;
        match self {
            FfiError::NullPointer(_) => ZvStatus::NullPointer,
            FfiError::InvalidUtf8(_) => ZvStatus::InvalidUtf8,
            FfiError::Panic(_) => ZvStatus::Panic,
            FfiError::Core(e) => match e {
                E::UnknownCatalog(_) => ZvStatus::UnknownCatalog,
                E::ParameterOutOfRange(_) => ZvStatus::ParameterOutOfRange,
                E::InvalidMeasure(_) => ZvStatus::InvalidMeasure,
                E::MalformedSpec(_) => ZvStatus::MalformedSpec,
                E::DegenerateKernel => ZvStatus::DegenerateKernel,
                E::QuadratureBudget { .. } | E::Embedding(_) | E::Discretization { .. } => ZvStatus::Budget,
                E::IdentityViolation(_) => ZvStatus::IdentityViolation,
                E::SizeGuard(_) => ZvStatus::SizeGuard,
                E::Unsupported(_) => ZvStatus::Unsupported,
                E::Io(_) => ZvStatus::Io,
            },
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

/// Runs `f`, converting errors and panics into a status and recording the message.
fn guard<F: FnOnce() -> Result<(), FfiError>>(f: F) -> ZvStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| p.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        Err(FfiError::Panic(msg))
    });
    match outcome {
        Ok(()) => {
            LAST_ERROR.with(|e| e.borrow_mut().clear());
            ZvStatus::Ok
        }
        Err(e) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = e.to_string());
            e.status()
        }
    }
}

fn out_ref<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, FfiError> {
    // SAFETY: the caller guarantees that a non-null `p` points to writable storage for a `T`.
    unsafe { p.as_mut() }.ok_or(FfiError::NullPointer(name))
}

fn kernel_ref<'a>(k: *const ZvKernel) -> Result<&'a Kernel, FfiError> {
    // SAFETY: non-null handles come from `zv_kernel_from_json` and are alive until freed.
    unsafe { k.as_ref() }.map(|k| &k.inner).ok_or(FfiError::NullPointer("kernel"))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn zv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the message of the last failure on this thread into `buf` (NUL-terminated,
/// truncated to `len − 1` bytes) and returns the full message length in bytes.
/// Pass a null `buf` to query the length only.
///
/// # Safety
/// `buf` must be null or point to at least `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn zv_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            // SAFETY: `buf` holds at least `len > n` bytes by the caller's contract.
            unsafe {
                std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), n);
                *buf.add(n) = 0;
            }
        }
        msg.len()
    })
}

/// Builds a kernel from a JSON spec such as `{"catalog":"gaussian"}` and stores the handle in `out`.
///
/// # Safety
/// `json` must be null or a NUL-terminated string; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn zv_kernel_from_json(json: *const c_char, out: *mut *mut ZvKernel) -> ZvStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = std::ptr::null_mut();
        if json.is_null() {
            return Err(FfiError::NullPointer("json"));
        }
        // SAFETY: `json` is a NUL-terminated string by the caller's contract.
        let text = unsafe { CStr::from_ptr(json) }.to_str().map_err(|_| FfiError::InvalidUtf8("json"))?;
        let inner = Kernel::from_spec(&KernelSpec::parse(text)?)?;
        *out = Box::into_raw(Box::new(ZvKernel { inner }));
        Ok(())
    })
}

/// Releases a kernel handle. Null is ignored.
///
/// # Safety
/// `kernel` must be null or a handle from [`zv_kernel_from_json`] that was not freed before.
#[no_mangle]
pub unsafe extern "C" fn zv_kernel_free(kernel: *mut ZvKernel) {
    if !kernel.is_null() {
        // SAFETY: the handle was produced by `Box::into_raw` and ownership returns here.
        drop(unsafe { Box::from_raw(kernel) });
    }
}

/// `σ = √(−r″(0))`.
///
/// # Safety
/// `kernel` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn zv_kernel_sigma(kernel: *const ZvKernel, out: *mut f64) -> ZvStatus {
    guard(|| {
        *out_ref(out, "out")? = kernel_ref(kernel)?.sigma();
        Ok(())
    })
}

/// Covariance `r(t)`.
///
/// # Safety
/// `kernel` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn zv_kernel_covariance(kernel: *const ZvKernel, t: f64, out: *mut f64) -> ZvStatus {
    guard(|| {
        let k = kernel_ref(kernel)?;
        *out_ref(out, "out")? = k.try_jet(t)?.r;
        Ok(())
    })
}

/// Key integral `I(T) = ∫₀^T (1 − t/T) μ̂(t)² dt` to relative tolerance `tol`.
///
/// # Safety
/// `kernel` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn zv_key_integral(kernel: *const ZvKernel, t: f64, tol: f64, out: *mut f64) -> ZvStatus {
    guard(|| {
        let k = kernel_ref(kernel)?;
        *out_ref(out, "out")? = key_integral(k, t, tol)?;
        Ok(())
    })
}

/// Chaos-series estimate of `var N(T)` with default options. `lower_bound` may be null.
///
/// # Safety
/// `kernel` must be null or a live handle; `total` must be null or writable; `lower_bound`
/// must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn zv_variance_chaos(kernel: *const ZvKernel, t: f64, total: *mut f64, lower_bound: *mut f64) -> ZvStatus {
    guard(|| {
        let k = kernel_ref(kernel)?;
        let total = out_ref(total, "total")?;
        let r = variance_chaos(k, t, &ChaosOptions::default())?;
        *total = r.total;
        // SAFETY: a non-null `lower_bound` is writable by the caller's contract.
        if let Some(lb) = unsafe { lower_bound.as_mut() } {
            *lb = r.lower_bound;
        }
        Ok(())
    })
}

/// Monte Carlo mean and variance of the zero count on `[0, T]` by spectral synthesis.
///
/// # Safety
/// `kernel` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn zv_simulate(kernel: *const ZvKernel, t: f64, dt: f64, n_paths: u64, seed: u64, out: *mut ZvMoments) -> ZvStatus {
    guard(|| {
        let k = kernel_ref(kernel)?.clone();
        let out = out_ref(out, "out")?;
        let s = estimate_moments(&PathSpec::new(k, t, dt, n_paths as usize, seed))?;
        *out = ZvMoments {
            mean: s.mean,
            mean_se: s.mean_se,
            var: s.var,
            var_se: s.var_se,
        };
        Ok(())
    })
}

/// Runs every exact identity check up to order `q_max` and stores the number of failing reports.
///
/// # Safety
/// `failures` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn zv_verify_identities(q_max: u32, failures: *mut u32) -> ZvStatus {
    guard(|| {
        let failures = out_ref(failures, "failures")?;
        *failures = verify_all(q_max)?.iter().filter(|r| !r.passed()).count() as u32;
        Ok(())
    })
}

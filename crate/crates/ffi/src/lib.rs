//! C ABI over the `fracdev` library.
//!
//! Objects are opaque heap handles released by their `_free` function.
//! Every fallible call returns a [`FracdevStatus`]; on failure the message
//! is available from [`fracdev_last_error`] on the same thread. Optional
//! real parameters are passed as NaN.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fracdev::processes::{process_scheme, Grid, Path, ProcessKind, ProcessParams, DEFAULT_TAIL_TOLERANCE};
use fracdev::seminorms::{classify, evaluate, rate_gamma, SemiNormKind, SemiNormSpec};
use fracdev::smalldev::{bm_sup_oracle, mc_small_ball, tauberian_constant, SmallBallOptions};
use fracdev::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracdevStatus {
    Ok = 0,
    InvalidParameter = 1,
    EmptySample = 2,
    GaussianTail = 3,
    OffGrid = 4,
    EmptyInterval = 5,
    NonDyadic = 6,
    Quadrature = 7,
    NotApplicable = 8,
    Degenerate = 9,
    Format = 10,
    Io = 11,
    Json = 12,
    NullPointer = 13,
    Panic = 14,
}

impl From<&Error> for FracdevStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) => Self::InvalidParameter,
            Error::EmptySample => Self::EmptySample,
            Error::GaussianTail => Self::GaussianTail,
            Error::OffGrid(_) => Self::OffGrid,
            Error::EmptyInterval => Self::EmptyInterval,
            Error::NonDyadic(_) => Self::NonDyadic,
            Error::Quadrature { .. } => Self::Quadrature,
            Error::NotApplicable(_) => Self::NotApplicable,
            Error::Degenerate(_) => Self::Degenerate,
            Error::Format(_) => Self::Format,
            Error::Io(_) => Self::Io,
            Error::Json(_) => Self::Json,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracdevProcessKind {
    Rlp = 0,
    Lmp = 1,
    Lfsm = 2,
    Balanced = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracdevNormKind {
    Sup = 0,
    Lp = 1,
    Holder = 2,
    CalderonZygmund = 3,
    Lipschitz = 4,
    Pvar = 5,
    Sobolev = 6,
    Besov = 7,
}

/// Opaque process parameters.
pub struct FracdevProcess(ProcessParams);

/// Opaque semi-norm.
pub struct FracdevSeminorm(SemiNormSpec);

/// Opaque sampled path.
pub struct FracdevPath(Path);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> Result<(), (FracdevStatus, String)>) -> FracdevStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FracdevStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FracdevStatus::Panic
        }
    }
}

fn lib<T>(r: fracdev::Result<T>) -> Result<T, (FracdevStatus, String)> {
    r.map_err(|e| (FracdevStatus::from(&e), e.to_string()))
}

fn null(what: &str) -> (FracdevStatus, String) {
    (FracdevStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (FracdevStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, v: T, what: &str) -> Result<(), (FracdevStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

fn optional(x: f64) -> Option<f64> {
    (!x.is_nan()).then_some(x)
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library from this thread.
#[no_mangle]
pub extern "C" fn fracdev_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fracdev_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates process parameters.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn fracdev_process_new(
    kind: FracdevProcessKind,
    alpha: f64,
    hurst: f64,
    normalize_gaussian: bool,
    out: *mut *mut FracdevProcess,
) -> FracdevStatus {
    guard(|| {
        let kind = match kind {
            FracdevProcessKind::Rlp => ProcessKind::Rlp,
            FracdevProcessKind::Lmp => ProcessKind::Lmp,
            FracdevProcessKind::Lfsm => ProcessKind::Lfsm,
            FracdevProcessKind::Balanced => ProcessKind::Balanced,
        };
        let p = lib(ProcessParams::new(kind, alpha, hurst, normalize_gaussian))?;
        write_out(out, Box::into_raw(Box::new(FracdevProcess(p))), "out")
    })
}

/// # Safety
/// `p` must be NULL or come from [`fracdev_process_new`], freed once.
#[no_mangle]
pub unsafe extern "C" fn fracdev_process_free(p: *mut FracdevProcess) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Creates a semi-norm; `eta`, `p`, `q` are NaN when not used.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn fracdev_seminorm_new(
    kind: FracdevNormKind,
    eta: f64,
    p: f64,
    q: f64,
    out: *mut *mut FracdevSeminorm,
) -> FracdevStatus {
    guard(|| {
        let kind = match kind {
            FracdevNormKind::Sup => SemiNormKind::Sup,
            FracdevNormKind::Lp => SemiNormKind::Lp,
            FracdevNormKind::Holder => SemiNormKind::Holder,
            FracdevNormKind::CalderonZygmund => SemiNormKind::CalderonZygmund,
            FracdevNormKind::Lipschitz => SemiNormKind::Lipschitz,
            FracdevNormKind::Pvar => SemiNormKind::Pvar,
            FracdevNormKind::Sobolev => SemiNormKind::Sobolev,
            FracdevNormKind::Besov => SemiNormKind::Besov,
        };
        let s = lib(SemiNormSpec::new(kind, optional(eta), optional(p), optional(q)))?;
        write_out(out, Box::into_raw(Box::new(FracdevSeminorm(s))), "out")
    })
}

/// # Safety
/// `s` must be NULL or come from [`fracdev_seminorm_new`], freed once.
#[no_mangle]
pub unsafe extern "C" fn fracdev_seminorm_free(s: *mut FracdevSeminorm) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Small-deviation exponent `γ` of the semi-norm for self-similarity `hurst`.
///
/// # Safety
/// `s` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn fracdev_rate_gamma(
    s: *const FracdevSeminorm,
    hurst: f64,
    out: *mut f64,
) -> FracdevStatus {
    guard(|| {
        let s = deref(s, "seminorm")?;
        let g = lib(rate_gamma(hurst, &classify(&s.0)))?;
        write_out(out, g, "out")
    })
}

/// Simulates path `index` of the stream family `seed` on `2^level` cells of
/// `[0, 1]`.
///
/// # Safety
/// `p` must be a live handle and `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn fracdev_simulate(
    p: *const FracdevProcess,
    level: u32,
    seed: u64,
    index: u64,
    out: *mut *mut FracdevPath,
) -> FracdevStatus {
    guard(|| {
        let p = deref(p, "process")?;
        let grid = lib(Grid::dyadic(level, 1.0))?;
        let scheme = lib(process_scheme(&p.0, grid, DEFAULT_TAIL_TOLERANCE))?;
        let path = scheme
            .sampler(seed)
            .paths(index..index + 1)
            .pop()
            .expect("one path requested");
        write_out(out, Box::into_raw(Box::new(FracdevPath(path))), "out")
    })
}

/// Wraps `len` values on a uniform grid of `[0, horizon]`.
///
/// # Safety
/// `values` must point to `len` readable doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn fracdev_path_from_values(
    values: *const f64,
    len: usize,
    horizon: f64,
    out: *mut *mut FracdevPath,
) -> FracdevStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        if len < 2 {
            return Err((FracdevStatus::InvalidParameter, "need at least 2 values".into()));
        }
        let v = std::slice::from_raw_parts(values, len).to_vec();
        let grid = lib(Grid::uniform(len - 1, horizon))?;
        let path = lib(Path::new(grid, v))?;
        write_out(out, Box::into_raw(Box::new(FracdevPath(path))), "out")
    })
}

/// # Safety
/// `p` must be NULL or a path handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn fracdev_path_free(p: *mut FracdevPath) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of grid values, 0 for NULL.
///
/// # Safety
/// `p` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fracdev_path_len(p: *const FracdevPath) -> usize {
    p.as_ref().map_or(0, |p| p.0.values.len())
}

/// Borrowed pointer to the values, valid while the handle lives.
///
/// # Safety
/// `p` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fracdev_path_values(p: *const FracdevPath) -> *const f64 {
    p.as_ref().map_or(ptr::null(), |p| p.0.values.as_ptr())
}

/// Grid step, NaN for NULL.
///
/// # Safety
/// `p` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fracdev_path_step(p: *const FracdevPath) -> f64 {
    p.as_ref().map_or(f64::NAN, |p| p.0.grid.step())
}

/// Semi-norm of the path on `[a, b]` (grid points).
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fracdev_seminorm_eval(
    s: *const FracdevSeminorm,
    path: *const FracdevPath,
    a: f64,
    b: f64,
    out: *mut f64,
) -> FracdevStatus {
    guard(|| {
        let s = deref(s, "seminorm")?;
        let path = deref(path, "path")?;
        let v = lib(evaluate(&s.0, &path.0, a, b))?;
        write_out(out, v, "out")
    })
}

/// Monte-Carlo `P[‖X‖ ≤ ε]` for `n_eps` radii; each output array holds
/// `n_eps` entries.
///
/// # Safety
/// Handles must be live, `eps` readable and the outputs writable for
/// `n_eps` elements.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn fracdev_small_ball(
    p: *const FracdevProcess,
    s: *const FracdevSeminorm,
    eps: *const f64,
    n_eps: usize,
    n_samples: u64,
    level: u32,
    seed: u64,
    p_hat: *mut f64,
    stderr: *mut f64,
    hits: *mut u64,
) -> FracdevStatus {
    guard(|| {
        let p = deref(p, "process")?;
        let s = deref(s, "seminorm")?;
        if eps.is_null() || p_hat.is_null() || stderr.is_null() || hits.is_null() {
            return Err(null("array argument"));
        }
        let eps = std::slice::from_raw_parts(eps, n_eps);
        let opts = SmallBallOptions::new(level, seed);
        let run = lib(mc_small_ball(&p.0, &s.0, eps, n_samples, &opts))?;
        for (i, e) in run.estimates.iter().enumerate() {
            p_hat.add(i).write(e.p_hat);
            stderr.add(i).write(e.stderr);
            hits.add(i).write(e.hits);
        }
        Ok(())
    })
}

/// `P[sup_{[0,1]} |W| ≤ ε]` for standard Brownian motion.
#[no_mangle]
pub extern "C" fn fracdev_bm_sup_oracle(epsilon: f64) -> f64 {
    bm_sup_oracle(epsilon)
}

/// Small-ball constant from a Laplace exponent `−Ψ(h) ~ C h^{1/q}`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fracdev_tauberian_constant(c: f64, q: f64, out: *mut f64) -> FracdevStatus {
    guard(|| {
        let k = lib(tauberian_constant(c, q))?;
        write_out(out, k, "out")
    })
}

/// Reads the process kind name into a static string (for diagnostics).
///
/// # Safety
/// `p` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fracdev_process_kind_name(p: *const FracdevProcess) -> *const c_char {
    let Some(p) = p.as_ref() else {
        return ptr::null();
    };
    let name: &'static CStr = match p.0.kind() {
        ProcessKind::Rlp => c"rlp",
        ProcessKind::Lmp => c"lmp",
        ProcessKind::Lfsm => c"lfsm",
        ProcessKind::Balanced => c"balanced",
    };
    name.as_ptr()
}

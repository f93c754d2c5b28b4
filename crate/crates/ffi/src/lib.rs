//! C ABI over the `vcascade` engine.
//!
//! Objects are opaque heap handles created by `*_new` / `*_run` functions and
//! released with the matching `*_free`. Every fallible call returns a
//! [`VcStatus`]; on failure [`vc_last_error_message`] describes the cause for the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use vcascade::observables::{entropy_cubic, inversion, moments, reduced_rho, wigner, WignerSpec};
use vcascade::{choose_truncation, run_cascade_with, Cascade, CascadeOptions, Error, ModelParams, NonlinearityFn};

/// Status codes; the non-zero engine codes match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VcStatus {
    Ok = 0,
    InvalidArgument = 2,
    ProjectionFloor = 3,
    Truncation = 4,
    Numerical = 5,
    NullPointer = 6,
    OutOfRange = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VcNonlinearity {
    One = 0,
    Sqrt = 1,
}

/// Coupling, detuning and nonlinearity in scaled units (`lambda2 = 1`).
pub struct VcParams {
    lambda1: f64,
    delta1: f64,
    delta2: f64,
    nonlinearity: VcNonlinearity,
}

/// Result of a two-atom run.
pub struct VcCascade {
    cascade: Cascade,
    n_max: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> VcStatus {
    match err {
        Error::InvalidParameters(_) => VcStatus::InvalidArgument,
        Error::UnmeasurableOutcome { .. } => VcStatus::ProjectionFloor,
        Error::Truncation(_) => VcStatus::Truncation,
        _ => VcStatus::Numerical,
    }
}

fn fail(status: VcStatus, msg: &str) -> VcStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> Result<(), (VcStatus, String)>) -> VcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            VcStatus::Ok
        }
        Ok(Err((s, m))) => fail(s, &m),
        Err(_) => fail(VcStatus::Panic, "internal panic"),
    }
}

fn engine<T>(r: vcascade::Result<T>) -> Result<T, (VcStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null() -> (VcStatus, String) {
    (VcStatus::NullPointer, "null pointer argument".into())
}

fn sample<'a>(c: *const VcCascade, index: usize) -> Result<&'a vcascade::PassageState, (VcStatus, String)> {
    // SAFETY: the caller passes a handle obtained from `vc_cascade_run` or null.
    let c = unsafe { c.as_ref() }.ok_or_else(null)?;
    c.cascade
        .states
        .get(index)
        .ok_or_else(|| (VcStatus::OutOfRange, format!("sample {index} of {}", c.cascade.states.len())))
}

fn write_out<T>(out: *mut T, v: T) -> Result<(), (VcStatus, String)> {
    if out.is_null() {
        return Err(null());
    }
    // SAFETY: non-null, caller-provided storage for one `T`.
    unsafe { out.write(v) };
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn vc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Engine version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a parameter set; `*out` receives the handle.
#[no_mangle]
pub extern "C" fn vc_params_new(
    lambda1: f64,
    delta1: f64,
    delta2: f64,
    nonlinearity: VcNonlinearity,
    out: *mut *mut VcParams,
) -> VcStatus {
    guard(|| {
        let probe = ModelParams {
            lambda1,
            lambda2: 1.0,
            delta1,
            delta2,
            nonlinearity: NonlinearityFn::ConstantOne,
            n_max: 1,
        };
        engine(probe.validate())?;
        let handle = Box::new(VcParams {
            lambda1,
            delta1,
            delta2,
            nonlinearity,
        });
        write_out(out, Box::into_raw(handle))
    })
}

/// Releases a parameter handle; null is ignored.
#[no_mangle]
pub extern "C" fn vc_params_free(params: *mut VcParams) {
    if !params.is_null() {
        // SAFETY: handle came from `vc_params_new` and is freed once.
        drop(unsafe { Box::from_raw(params) });
    }
}

/// Coherent field with mean photon number `alpha_sq`, first atom for `tau1`,
/// detection in `|g>`, second atom sampled at `tau2[0..n_tau2]`.
/// `tail_tol` sets the Fock truncation (`<= 0` selects the default `1e-12`).
#[no_mangle]
pub extern "C" fn vc_cascade_run(
    params: *const VcParams,
    alpha_sq: f64,
    tau1: f64,
    tau2: *const f64,
    n_tau2: usize,
    tail_tol: f64,
    out: *mut *mut VcCascade,
) -> VcStatus {
    guard(|| {
        // SAFETY: caller passes a handle from `vc_params_new` or null.
        let p = unsafe { params.as_ref() }.ok_or_else(null)?;
        if tau2.is_null() && n_tau2 > 0 {
            return Err(null());
        }
        if !(alpha_sq >= 0.0 && alpha_sq.is_finite()) {
            return Err((VcStatus::InvalidArgument, format!("alpha_sq = {alpha_sq} must be non-negative")));
        }
        let taus: &[f64] = if n_tau2 == 0 {
            &[]
        } else {
            // SAFETY: non-null and, per contract, `n_tau2` readable doubles.
            unsafe { std::slice::from_raw_parts(tau2, n_tau2) }
        };
        let mut opts = CascadeOptions::default();
        if tail_tol > 0.0 {
            opts.tail_tol = tail_tol;
        }
        let n_max = engine(choose_truncation(alpha_sq, opts.tail_tol))?;
        let nonlinearity = match p.nonlinearity {
            VcNonlinearity::One => NonlinearityFn::ConstantOne,
            VcNonlinearity::Sqrt => NonlinearityFn::SquareRoot,
        };
        let params = ModelParams {
            lambda1: p.lambda1,
            lambda2: 1.0,
            delta1: p.delta1,
            delta2: p.delta2,
            nonlinearity,
            n_max,
        };
        let alpha = Complex64::new(alpha_sq.sqrt(), 0.0);
        let cascade = engine(run_cascade_with(&params, alpha, tau1, taus, &opts))?;
        write_out(out, Box::into_raw(Box::new(VcCascade { cascade, n_max })))
    })
}

/// Releases a cascade handle; null is ignored.
#[no_mangle]
pub extern "C" fn vc_cascade_free(cascade: *mut VcCascade) {
    if !cascade.is_null() {
        // SAFETY: handle came from `vc_cascade_run` and is freed once.
        drop(unsafe { Box::from_raw(cascade) });
    }
}

/// Number of second-passage samples (0 for a null handle).
#[no_mangle]
pub extern "C" fn vc_cascade_len(cascade: *const VcCascade) -> usize {
    // SAFETY: handle from `vc_cascade_run` or null.
    unsafe { cascade.as_ref() }.map_or(0, |c| c.cascade.states.len())
}

/// Fock cutoff used for the initial field (0 for a null handle).
#[no_mangle]
pub extern "C" fn vc_cascade_n_max(cascade: *const VcCascade) -> usize {
    // SAFETY: handle from `vc_cascade_run` or null.
    unsafe { cascade.as_ref() }.map_or(0, |c| c.n_max)
}

/// Probability of the ground-state detection that conditioned the field.
#[no_mangle]
pub extern "C" fn vc_cascade_probability(cascade: *const VcCascade, out: *mut f64) -> VcStatus {
    guard(|| {
        // SAFETY: handle from `vc_cascade_run` or null.
        let c = unsafe { cascade.as_ref() }.ok_or_else(null)?;
        write_out(out, c.cascade.projection.probability)
    })
}

/// Atomic inversion of sample `index`.
#[no_mangle]
pub extern "C" fn vc_cascade_inversion(cascade: *const VcCascade, index: usize, out: *mut f64) -> VcStatus {
    guard(|| write_out(out, inversion(sample(cascade, index)?)))
}

/// Atom-field entanglement entropy (natural log) of sample `index`.
#[no_mangle]
pub extern "C" fn vc_cascade_entropy(cascade: *const VcCascade, index: usize, out: *mut f64) -> VcStatus {
    guard(|| {
        let s = engine(entropy_cubic(&reduced_rho(sample(cascade, index)?)))?;
        write_out(out, s)
    })
}

/// Mandel Q of sample `index`.
#[no_mangle]
pub extern "C" fn vc_cascade_mandel_q(cascade: *const VcCascade, index: usize, out: *mut f64) -> VcStatus {
    guard(|| {
        let q = engine(engine(moments(sample(cascade, index)?))?.mandel_q())?;
        write_out(out, q)
    })
}

/// Quadrature squeezing of sample `index`; `order` is 1 (normal) or 2 (amplitude-squared).
#[no_mangle]
pub extern "C" fn vc_cascade_squeezing(
    cascade: *const VcCascade,
    index: usize,
    order: u32,
    s_x: *mut f64,
    s_p: *mut f64,
) -> VcStatus {
    guard(|| {
        if s_x.is_null() || s_p.is_null() {
            return Err(null());
        }
        let m = engine(moments(sample(cascade, index)?))?;
        let pair = match order {
            1 => m.squeezing_first(),
            2 => m.squeezing_second(),
            _ => return Err((VcStatus::InvalidArgument, format!("squeezing order {order} must be 1 or 2"))),
        };
        write_out(s_x, pair.s_x)?;
        write_out(s_p, pair.s_p)
    })
}

/// Wigner function of sample `index` on the square grid `[-half_width, half_width]^2`
/// with `resolution` points per axis. `values` must hold `resolution^2` doubles and
/// is filled row by row over the imaginary axis: `values[j*resolution + i]`.
#[no_mangle]
pub extern "C" fn vc_cascade_wigner(
    cascade: *const VcCascade,
    index: usize,
    half_width: f64,
    resolution: usize,
    values: *mut f64,
    len: usize,
) -> VcStatus {
    guard(|| {
        if values.is_null() {
            return Err(null());
        }
        let needed = resolution.checked_mul(resolution).unwrap_or(usize::MAX);
        if len < needed {
            return Err((VcStatus::OutOfRange, format!("buffer holds {len} values, grid needs {needed}")));
        }
        let grid = engine(wigner(sample(cascade, index)?, &WignerSpec::new(half_width, resolution)))?;
        // SAFETY: non-null with at least `needed` writable doubles.
        unsafe { ptr::copy_nonoverlapping(grid.values.as_ptr(), values, needed) };
        Ok(())
    })
}

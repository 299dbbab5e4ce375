//! C ABI over `ptspectra`.
//!
//! Every fallible call returns a [`PtsStatus`]; objects are opaque handles
//! released with their `*_free` function. The message of the last failure on
//! the calling thread is available through [`pts_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use ptspectra::airy::{airy_ai, airy_ai_prime};
use ptspectra::linear::exact_spectrum;
use ptspectra::numerics::ModelParams;
use ptspectra::scaling::{integrate_branch, ScalingBranch};
use ptspectra::shooting::{classify, find_spectrum, EigenvalueRecord, Regime};
use ptspectra::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NoConvergence = 3,
    NumericalFailure = 4,
    OutOfRange = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtsRegime {
    BoxType = 0,
    BohrSommerfeld = 1,
    Complex = 2,
    Transition = 3,
}

impl From<Regime> for PtsRegime {
    fn from(r: Regime) -> Self {
        match r {
            Regime::BT => PtsRegime::BoxType,
            Regime::BS => PtsRegime::BohrSommerfeld,
            Regime::CO => PtsRegime::Complex,
            Regime::Transition => PtsRegime::Transition,
        }
    }
}

/// One eigenvalue: physical and mapped energy, 1-based index and regime.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtsEigenvalue {
    pub j: u32,
    pub re: f64,
    pub im: f64,
    pub mapped_re: f64,
    pub mapped_im: f64,
    pub regime: PtsRegime,
}

/// Opaque model parameters.
pub struct PtsModel(ModelParams);

/// Opaque list of eigenvalues.
pub struct PtsSpectrum(Vec<EigenvalueRecord>);

/// Opaque complex scaling branch.
pub struct PtsScalingBranch(ScalingBranch);

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut v: Vec<u8> = msg.bytes().filter(|&b| b != 0).collect();
        v.push(0);
        *e.borrow_mut() = v;
    });
}

fn status_of(e: &Error) -> PtsStatus {
    match e {
        Error::InvalidParams(_) | Error::WrongModel(_) | Error::DegenerateEnergy(_) | Error::ConfigInvalid { .. } => {
            PtsStatus::InvalidArgument
        }
        Error::NoConvergence { .. } | Error::IncompleteSpectrum { .. } | Error::NotMonotone(_) => PtsStatus::NoConvergence,
        Error::OutOfBranch { .. } => PtsStatus::OutOfRange,
        _ => PtsStatus::NumericalFailure,
    }
}

/// Runs `f`, mapping errors and panics to a status and recording the message.
fn guard<F: FnOnce() -> Result<(), (PtsStatus, String)>>(f: F) -> PtsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PtsStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("panic inside ptspectra");
            PtsStatus::Panic
        }
    }
}

fn lib<T>(r: ptspectra::Result<T>) -> Result<T, (PtsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null() -> (PtsStatus, String) {
    (PtsStatus::NullPointer, "null pointer argument".into())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pts_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (truncated,
/// always NUL-terminated) and returns the full message length without NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn pts_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let body = msg.len().saturating_sub(1);
        if !buf.is_null() && len > 0 {
            let n = body.min(len - 1);
            // SAFETY: caller guarantees `buf` holds `len` bytes; n < len.
            unsafe {
                ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n) = 0;
            }
        }
        body
    })
}

/// # Safety
/// `out` must be null or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn pts_model_new(n: u32, g: f64, l: f64, hbar: f64, out: *mut *mut PtsModel) -> PtsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let p = lib(ModelParams::new(n, g, l, hbar))?;
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(PtsModel(p))) };
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from [`pts_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pts_model_free(model: *mut PtsModel) {
    if !model.is_null() {
        // SAFETY: handle came from Box::into_raw.
        drop(unsafe { Box::from_raw(model) });
    }
}

unsafe fn spectrum_out(
    model: *const PtsModel,
    out: *mut *mut PtsSpectrum,
    f: impl FnOnce(&ModelParams) -> ptspectra::Result<Vec<EigenvalueRecord>>,
) -> PtsStatus {
    guard(|| {
        if model.is_null() || out.is_null() {
            return Err(null());
        }
        // SAFETY: caller passes a live handle.
        let p = unsafe { &(*model).0 };
        let recs = lib(f(p))?;
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(PtsSpectrum(recs))) };
        Ok(())
    })
}

/// The `count` eigenvalues of smallest modulus by shooting.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn pts_spectrum_shooting(
    model: *const PtsModel,
    count: usize,
    out: *mut *mut PtsSpectrum,
) -> PtsStatus {
    unsafe { spectrum_out(model, out, |p| find_spectrum(p, count)) }
}

/// Roots of the Airy characteristic determinant; `n` must be 0.
///
/// # Safety
/// As [`pts_spectrum_shooting`].
#[no_mangle]
pub unsafe extern "C" fn pts_spectrum_airy(model: *const PtsModel, count: usize, out: *mut *mut PtsSpectrum) -> PtsStatus {
    unsafe {
        spectrum_out(model, out, |p| {
            if p.n != 0 {
                return Err(Error::WrongModel(p.n));
            }
            exact_spectrum(p, count)?
                .into_iter()
                .enumerate()
                .map(|(k, e)| {
                    Ok(EigenvalueRecord { j: k + 1, l: p.l, e, e_mapped: p.to_mapped(e), regime: classify(e, p)? })
                })
                .collect()
        })
    }
}

/// Number of eigenvalues; 0 for a null handle.
///
/// # Safety
/// `spec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pts_spectrum_len(spec: *const PtsSpectrum) -> usize {
    if spec.is_null() {
        0
    } else {
        // SAFETY: live handle.
        unsafe { (*spec).0.len() }
    }
}

/// # Safety
/// `spec` must be a live handle and `out` valid for one [`PtsEigenvalue`].
#[no_mangle]
pub unsafe extern "C" fn pts_spectrum_get(spec: *const PtsSpectrum, index: usize, out: *mut PtsEigenvalue) -> PtsStatus {
    guard(|| {
        if spec.is_null() || out.is_null() {
            return Err(null());
        }
        // SAFETY: live handle.
        let recs = unsafe { &(*spec).0 };
        let r = recs
            .get(index)
            .ok_or((PtsStatus::OutOfRange, format!("index {index} >= length {}", recs.len())))?;
        let v = PtsEigenvalue {
            j: r.j as u32,
            re: r.e.re,
            im: r.e.im,
            mapped_re: r.e_mapped.re,
            mapped_im: r.e_mapped.im,
            regime: r.regime.into(),
        };
        // SAFETY: checked non-null above.
        unsafe { *out = v };
        Ok(())
    })
}

/// # Safety
/// `spec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pts_spectrum_free(spec: *mut PtsSpectrum) {
    if !spec.is_null() {
        // SAFETY: handle came from Box::into_raw.
        drop(unsafe { Box::from_raw(spec) });
    }
}

/// Integrates the complex scaling branch for `n` at tolerance `tol`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn pts_scaling_branch_new(n: u32, tol: f64, out: *mut *mut PtsScalingBranch) -> PtsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let b = lib(integrate_branch(n, tol))?;
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(PtsScalingBranch(b))) };
        Ok(())
    })
}

/// Endpoint `(tau_c, E_c)` of the branch.
///
/// # Safety
/// `branch` must be a live handle; outputs valid for one `double` each.
#[no_mangle]
pub unsafe extern "C" fn pts_scaling_branch_endpoint(
    branch: *const PtsScalingBranch,
    tau_c: *mut f64,
    e_c: *mut f64,
) -> PtsStatus {
    guard(|| {
        if branch.is_null() || tau_c.is_null() || e_c.is_null() {
            return Err(null());
        }
        // SAFETY: pointers checked non-null; caller guarantees validity.
        unsafe {
            *tau_c = (*branch).0.tau_c;
            *e_c = (*branch).0.e_c;
        }
        Ok(())
    })
}

/// Mapped energy on the branch at `tau` in `[0, tau_c]`.
///
/// # Safety
/// `branch` must be a live handle; outputs valid for one `double` each.
#[no_mangle]
pub unsafe extern "C" fn pts_scaling_branch_eval(
    branch: *const PtsScalingBranch,
    tau: f64,
    re: *mut f64,
    im: *mut f64,
) -> PtsStatus {
    guard(|| {
        if branch.is_null() || re.is_null() || im.is_null() {
            return Err(null());
        }
        // SAFETY: live handle.
        let e = lib(unsafe { &(*branch).0 }.eval(tau))?;
        // SAFETY: checked non-null above.
        unsafe {
            *re = e.re;
            *im = e.im;
        }
        Ok(())
    })
}

/// # Safety
/// `branch` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pts_scaling_branch_free(branch: *mut PtsScalingBranch) {
    if !branch.is_null() {
        // SAFETY: handle came from Box::into_raw.
        drop(unsafe { Box::from_raw(branch) });
    }
}

/// `Ai(z)` and `Ai'(z)` as `out[0..4] = {Re Ai, Im Ai, Re Ai', Im Ai'}`.
///
/// # Safety
/// `out` must be valid for writing four `double`s.
#[no_mangle]
pub unsafe extern "C" fn pts_airy(re: f64, im: f64, out: *mut f64) -> PtsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let z = Complex64::new(re, im);
        let (a, d) = (lib(airy_ai(z))?, lib(airy_ai_prime(z))?);
        // SAFETY: caller guarantees four writable doubles.
        unsafe {
            let s = std::slice::from_raw_parts_mut(out, 4);
            s.copy_from_slice(&[a.re, a.im, d.re, d.im]);
        }
        Ok(())
    })
}

/// Static NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn pts_status_name(status: PtsStatus) -> *const c_char {
    let s: &'static CStr = match status {
        PtsStatus::Ok => c"ok",
        PtsStatus::NullPointer => c"null pointer",
        PtsStatus::InvalidArgument => c"invalid argument",
        PtsStatus::NoConvergence => c"no convergence",
        PtsStatus::NumericalFailure => c"numerical failure",
        PtsStatus::OutOfRange => c"out of range",
        PtsStatus::Panic => c"panic",
    };
    s.as_ptr()
}

//! C ABI over `bgk-core`.
//!
//! Every fallible call returns a `BgkStatus`; on failure the message is kept
//! per thread and read back with `bgk_last_error_message`. Slices are opaque
//! handles owned by the caller and released with `bgk_slice_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::Arc;

use bgk_core::coefficients::{SpectralSlice, SplineProfile};
use bgk_core::dispersion::lambda_of_xi;
use bgk_core::evolution::evolve_spectral;
use bgk_core::quadrature::VelocityGrid;
use bgk_core::riemann::winding_index;
use bgk_core::specfun::{dawson, xi_function};
use bgk_core::BgkError;
use num_complex::Complex64;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BgkStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    InvalidArgument = 3,
    Numerical = 4,
    Panic = 5,
}

/// Opaque spectral slice handle.
pub struct BgkSlice {
    slice: SpectralSlice,
    grid: Arc<VelocityGrid>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &BgkError) -> BgkStatus {
    match err {
        BgkError::Domain(_) | BgkError::SpectralProximity { .. } => BgkStatus::Domain,
        BgkError::InvalidArgument(_)
        | BgkError::InvalidInputClass(_)
        | BgkError::Config(_)
        | BgkError::Degenerate(_) => BgkStatus::InvalidArgument,
        _ => BgkStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), BgkStatus>) -> BgkStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BgkStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            BgkStatus::Panic
        }
    }
}

fn fail(err: BgkError) -> BgkStatus {
    let s = status_of(&err);
    set_error(err.to_string());
    s
}

fn null(what: &str) -> BgkStatus {
    set_error(format!("null pointer: {what}"));
    BgkStatus::NullPointer
}

/// Copies the last error message of this thread into `buf` (NUL terminated,
/// truncated to `len`). Returns the full message length plus one, or 0 when
/// there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn bgk_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len);
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n - 1) = 0;
            }
            bytes.len()
        }
    })
}

/// Dawson function D(v).
#[no_mangle]
pub extern "C" fn bgk_dawson(v: f64) -> f64 {
    dawson(v)
}

/// Ξ(η) = sign(η)·√π·erfcx(|η|).
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bgk_xi_function(eta: f64, out: *mut f64) -> BgkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = xi_function(eta).map_err(fail)?;
        Ok(())
    })
}

/// Λ(ξ) on the real branch, |ξ| < √π.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bgk_lambda(xi: f64, out: *mut f64) -> BgkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lambda_of_xi(xi).map_err(fail)?;
        Ok(())
    })
}

/// Winding number of G along the real line.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bgk_winding_index(xi: f64, out: *mut i32) -> BgkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = winding_index(xi).map_err(fail)?.chi;
        Ok(())
    })
}

/// Builds a slice from samples of f̂₀(ξ, ·) at increasing velocities `v`,
/// interpolated by a natural cubic spline.
///
/// # Safety
/// `v`, `re`, `im` must each point to `n` readable doubles; `out` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bgk_slice_new(
    xi: f64,
    v: *const f64,
    re: *const f64,
    im: *const f64,
    n: usize,
    out: *mut *mut BgkSlice,
) -> BgkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if v.is_null() || re.is_null() || im.is_null() {
            return Err(null("samples"));
        }
        let (v, re, im) = (
            slice::from_raw_parts(v, n),
            slice::from_raw_parts(re, n),
            slice::from_raw_parts(im, n),
        );
        let values = re
            .iter()
            .zip(im)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        let profile = SplineProfile::new(v.to_vec(), values).map_err(fail)?;
        let slice = SpectralSlice::build(xi, Arc::new(profile)).map_err(fail)?;
        let handle = BgkSlice {
            slice,
            grid: Arc::new(VelocityGrid::resolved()),
        };
        *out = Box::into_raw(Box::new(handle));
        Ok(())
    })
}

/// Releases a slice; null is ignored.
///
/// # Safety
/// `slice` must come from `bgk_slice_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bgk_slice_free(slice: *mut BgkSlice) {
    if !slice.is_null() {
        drop(Box::from_raw(slice));
    }
}

/// Index χ of the slice, or `INT32_MIN` for a null handle.
///
/// # Safety
/// `slice` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bgk_slice_chi(slice: *const BgkSlice) -> i32 {
    slice.as_ref().map_or(i32::MIN, |s| s.slice.chi())
}

/// Real-branch coefficient C₀.
///
/// # Safety
/// `slice` must be null or a live handle; `re`, `im` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bgk_slice_c0(
    slice: *const BgkSlice,
    re: *mut f64,
    im: *mut f64,
) -> BgkStatus {
    guard(|| {
        let s = slice.as_ref().ok_or_else(|| null("slice"))?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let c0 = s.slice.c0();
        *re = c0.re;
        *im = c0.im;
        Ok(())
    })
}

/// Λ(ξ) of the slice; `Domain` on the index-0 branch.
///
/// # Safety
/// `slice` must be null or a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn bgk_slice_lambda(slice: *const BgkSlice, out: *mut f64) -> BgkStatus {
    guard(|| {
        let s = slice.as_ref().ok_or_else(|| null("slice"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        match s.slice.lambda() {
            Some(l) => {
                *out = l;
                Ok(())
            }
            None => Err(fail(BgkError::Domain(format!(
                "no real-branch eigenvalue at xi = {}",
                s.slice.xi()
            )))),
        }
    })
}

/// Number of velocity nodes on which `bgk_slice_evolve` reports.
///
/// # Safety
/// `slice` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bgk_slice_len(slice: *const BgkSlice) -> usize {
    slice.as_ref().map_or(0, |s| s.grid.len())
}

/// Copies the output velocity nodes into `out` (length `n`).
///
/// # Safety
/// `slice` must be null or a live handle; `out` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn bgk_slice_nodes(
    slice: *const BgkSlice,
    out: *mut f64,
    n: usize,
) -> BgkStatus {
    guard(|| {
        let s = slice.as_ref().ok_or_else(|| null("slice"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        check_len(n, s.grid.len())?;
        slice::from_raw_parts_mut(out, n).copy_from_slice(s.grid.nodes());
        Ok(())
    })
}

/// f̂(t, v) on the output nodes, split into real and imaginary parts.
///
/// # Safety
/// `slice` must be null or a live handle; `re`, `im` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn bgk_slice_evolve(
    slice: *const BgkSlice,
    t: f64,
    re: *mut f64,
    im: *mut f64,
    n: usize,
) -> BgkStatus {
    guard(|| {
        let s = slice.as_ref().ok_or_else(|| null("slice"))?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        check_len(n, s.grid.len())?;
        let f = evolve_spectral(&s.slice, Arc::clone(&s.grid), t).map_err(fail)?;
        let (re, im) = (
            slice::from_raw_parts_mut(re, n),
            slice::from_raw_parts_mut(im, n),
        );
        for ((r, i), z) in re.iter_mut().zip(im.iter_mut()).zip(&f.values) {
            *r = z.re;
            *i = z.im;
        }
        Ok(())
    })
}

fn check_len(n: usize, expected: usize) -> Result<(), BgkStatus> {
    if n == expected {
        Ok(())
    } else {
        Err(fail(BgkError::InvalidArgument(format!(
            "buffer holds {n} values, {expected} required"
        ))))
    }
}

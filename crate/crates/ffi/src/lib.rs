//! C bindings for `coarray-lab`.
//!
//! Every function returns a [`CoarrayStatus`]. On failure a message is kept
//! per thread and can be read with [`coarray_last_error`]. Handles are
//! heap objects owned by the caller and released with the matching `_free`.
//! Angles are radians. Panics never cross the boundary: they surface as
//! `COARRAY_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use coarray_lab::analysis::{analytical_mse, crb};
use coarray_lab::estimator::{estimate_from_snapshots, Augmentation, DoaOutcome, EstimatorOptions};
use coarray_lab::geometry::{make_array, Coarray};
use coarray_lab::{ArrayGeometry, ArrayKind, CMat, Error, SourceScenario, C64};

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarrayStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Geometry = 3,
    Scenario = 4,
    TooManySources = 5,
    SingularCovariance = 6,
    CrbUndefined = 7,
    BufferTooSmall = 8,
    /// The spectrum had fewer peaks than sources.
    Unresolved = 9,
    Numerical = 10,
    Panic = 99,
}

/// Coarray augmentation used before MUSIC.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarrayMethod {
    Direct = 0,
    SpatialSmoothing = 1,
}

/// Opaque sensor array with its precomputed difference coarray.
pub struct CoarrayArray(Coarray);

/// Opaque source scenario.
pub struct CoarrayScenario(SourceScenario);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

struct Failure(CoarrayStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Geometry(_) | Error::UnsupportedMra { .. } => CoarrayStatus::Geometry,
            Error::Scenario(_) | Error::UnequalPowers | Error::NotTwoSources(_) => CoarrayStatus::Scenario,
            Error::TooManySources { .. } => CoarrayStatus::TooManySources,
            Error::SingularCovariance { .. } => CoarrayStatus::SingularCovariance,
            Error::CrbUndefined { .. } => CoarrayStatus::CrbUndefined,
            Error::Dimension { .. } | Error::IndexOutOfRange { .. } | Error::EmptyGrid | Error::Config(_) => {
                CoarrayStatus::InvalidArgument
            }
            Error::Io { .. } => CoarrayStatus::Numerical,
        };
        Failure(code, e.to_string())
    }
}

fn fail(code: CoarrayStatus, msg: impl Into<String>) -> Failure {
    Failure(code, msg.into())
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> CoarrayStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CoarrayStatus::Ok
        }
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            CoarrayStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: caller promises a valid pointer or null
    unsafe { p.as_ref() }.ok_or_else(|| fail(CoarrayStatus::NullPointer, format!("{what} is null")))
}

fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(CoarrayStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: caller guarantees `len` readable elements
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn out_slice<'a, T>(p: *mut T, cap: usize, need: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if cap < need {
        return Err(fail(
            CoarrayStatus::BufferTooSmall,
            format!("{what} holds {cap} elements, {need} needed"),
        ));
    }
    if p.is_null() {
        return Err(fail(CoarrayStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: caller guarantees `cap >= need` writable elements
    Ok(unsafe { std::slice::from_raw_parts_mut(p, need) })
}

fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(fail(CoarrayStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: non-null and assumed writable
    unsafe { out.write(value) };
    Ok(())
}

fn publish<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    write_out(out, Box::into_raw(Box::new(value)), "output handle")
}

/// Message for the last failed call on this thread, or NULL after a
/// success. Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn coarray_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn coarray_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds an array from a textual spec such as `"nested:5,5"`,
/// `"coprime:3,5"`, `"mra:10"`, `"ula:8"` or `"custom:0,1,4"`.
///
/// # Safety
/// `spec` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coarray_array_from_spec(
    spec: *const c_char,
    d0: f64,
    wavelength: f64,
    out: *mut *mut CoarrayArray,
) -> CoarrayStatus {
    guard(|| {
        if spec.is_null() {
            return Err(fail(CoarrayStatus::NullPointer, "spec is null"));
        }
        let text = CStr::from_ptr(spec)
            .to_str()
            .map_err(|_| fail(CoarrayStatus::InvalidArgument, "spec is not UTF-8"))?;
        let kind: ArrayKind = text.parse()?;
        publish(out, CoarrayArray(Coarray::new(make_array(&kind, d0, wavelength)?)))
    })
}

/// Builds an array from integer sensor positions in units of `d0`.
///
/// # Safety
/// `positions` must hold `len` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coarray_array_from_positions(
    positions: *const i64,
    len: usize,
    d0: f64,
    wavelength: f64,
    out: *mut *mut CoarrayArray,
) -> CoarrayStatus {
    guard(|| {
        let pos = slice(positions, len, "positions")?.to_vec();
        publish(out, CoarrayArray(Coarray::new(ArrayGeometry::new(pos, d0, wavelength)?)))
    })
}

/// # Safety
/// `array` must come from a constructor above and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn coarray_array_free(array: *mut CoarrayArray) {
    if !array.is_null() {
        drop(Box::from_raw(array));
    }
}

/// Number of physical sensors.
///
/// # Safety
/// `array` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coarray_array_num_sensors(array: *const CoarrayArray, out: *mut usize) -> CoarrayStatus {
    guard(|| write_out(out, non_null(array, "array")?.0.num_sensors(), "out"))
}

/// Half-size `Mv` of the central virtual ULA.
///
/// # Safety
/// `array` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coarray_array_virtual_size(array: *const CoarrayArray, out: *mut usize) -> CoarrayStatus {
    guard(|| write_out(out, non_null(array, "array")?.0.mv(), "out"))
}

/// Copies the ascending sensor positions into `buf`.
///
/// # Safety
/// `buf` must hold `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn coarray_array_positions(
    array: *const CoarrayArray,
    buf: *mut i64,
    cap: usize,
) -> CoarrayStatus {
    guard(|| {
        let pos = non_null(array, "array")?.0.geometry.positions();
        out_slice(buf, cap, pos.len(), "buf")?.copy_from_slice(pos);
        Ok(())
    })
}

/// Scenario with `k` sources at `doas` (radians) with `powers`, plus white
/// noise of power `noise_power`.
///
/// # Safety
/// `doas` and `powers` must hold `k` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coarray_scenario_new(
    doas: *const f64,
    powers: *const f64,
    k: usize,
    noise_power: f64,
    out: *mut *mut CoarrayScenario,
) -> CoarrayStatus {
    guard(|| {
        let d = slice(doas, k, "doas")?.to_vec();
        let p = slice(powers, k, "powers")?.to_vec();
        publish(out, CoarrayScenario(SourceScenario::new(d, p, noise_power)?))
    })
}

/// # Safety
/// `scenario` must come from [`coarray_scenario_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn coarray_scenario_free(scenario: *mut CoarrayScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Asymptotic per-source MSE (rad²) of coarray MUSIC with `n` snapshots.
/// Writes `K` values to `out`.
///
/// # Safety
/// Handles must be live; `out` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn coarray_analytical_mse(
    array: *const CoarrayArray,
    scenario: *const CoarrayScenario,
    n: usize,
    out: *mut f64,
    cap: usize,
) -> CoarrayStatus {
    guard(|| {
        let co = &non_null(array, "array")?.0;
        let sc = &non_null(scenario, "scenario")?.0;
        if n == 0 {
            return Err(fail(CoarrayStatus::InvalidArgument, "n must be positive"));
        }
        let mse = analytical_mse(co, sc, n)?;
        let dst = out_slice(out, cap, sc.num_sources(), "out")?;
        for (k, v) in dst.iter_mut().enumerate() {
            *v = mse[(k, k)];
        }
        Ok(())
    })
}

/// Trace of the stochastic CRB on the DOAs (rad²) with `n` snapshots.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn coarray_crb_trace(
    array: *const CoarrayArray,
    scenario: *const CoarrayScenario,
    n: usize,
    out: *mut f64,
) -> CoarrayStatus {
    guard(|| {
        let co = &non_null(array, "array")?.0;
        let sc = &non_null(scenario, "scenario")?.0;
        if n == 0 {
            return Err(fail(CoarrayStatus::InvalidArgument, "n must be positive"));
        }
        write_out(out, crb(&co.geometry, sc, n)?.crb.trace(), "out")
    })
}

/// Estimates `k` DOAs from `n` snapshots of the array.
///
/// `snapshots` holds `2·M·n` doubles: interleaved real and imaginary
/// parts, one snapshot after another, so sensor `i` of snapshot `t` sits at
/// index `2·(t·M + i)`. A `grid_step_deg` of zero selects the default grid.
/// Writes `k` ascending DOAs in radians, or returns
/// `COARRAY_STATUS_UNRESOLVED` when the spectrum shows fewer than `k` peaks.
///
/// # Safety
/// `snapshots` must hold `2·M·n` doubles; `out` must hold `cap` doubles.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn coarray_estimate(
    array: *const CoarrayArray,
    snapshots: *const f64,
    n: usize,
    k: usize,
    method: CoarrayMethod,
    grid_step_deg: f64,
    out: *mut f64,
    cap: usize,
) -> CoarrayStatus {
    guard(|| {
        let co = &non_null(array, "array")?.0;
        let m = co.num_sensors();
        if n == 0 || k == 0 {
            return Err(fail(CoarrayStatus::InvalidArgument, "n and k must be positive"));
        }
        let mut opts = EstimatorOptions::default();
        if grid_step_deg != 0.0 {
            if !(grid_step_deg.is_finite() && grid_step_deg > 0.0 && grid_step_deg < 90.0) {
                return Err(fail(CoarrayStatus::InvalidArgument, "grid_step_deg must lie in (0, 90)"));
            }
            opts.grid_step_deg = grid_step_deg;
        }
        let raw = slice(snapshots, 2 * m * n, "snapshots")?;
        let y = CMat::from_fn(m, n, |i, t| {
            let at = 2 * (t * m + i);
            C64::new(raw[at], raw[at + 1])
        });
        let kind = match method {
            CoarrayMethod::Direct => Augmentation::Direct,
            CoarrayMethod::SpatialSmoothing => Augmentation::SpatialSmoothing,
        };
        match estimate_from_snapshots(co, &y, k, kind, &opts)? {
            DoaOutcome::Resolved(est) => {
                out_slice(out, cap, k, "out")?.copy_from_slice(&est.doas);
                Ok(())
            }
            DoaOutcome::Unresolved { peaks_found } => Err(fail(
                CoarrayStatus::Unresolved,
                format!("spectrum has {peaks_found} peaks, {k} sources requested"),
            )),
        }
    })
}

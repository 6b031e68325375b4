//! C ABI over the core library: opaque handles, integer status codes, and a
//! thread-local message describing the most recent failure.
//!
//! Every constructor hands back an owned pointer that must go through the
//! matching `_free`; every fallible call returns an `FdStatus` and writes
//! results through out-pointers only on `FD_STATUS_OK`. Handles are not
//! synchronized: share them across threads read-only or not at all.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fracdiff::coefficients::{lambda_coeffs, CoeffTable, FracOrder};
use fracdiff::fractional_ops::{frac_left, frac_right};
use fracdiff::grid::{Grid, GridFunction, TailModel};
use fracdiff::semigroups::{heat_point, poisson_point};
use fracdiff::{FracError, Side};

/// Why a call returned without a result. `fd_last_error` has the detail.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FdStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Arguments were rejected before any computation ran.
    InvalidArgument = 2,
    /// Validation passed but the computation could not reach its tolerance.
    NumericalFailure = 3,
}

/// Which ray the one-sided operators read from.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FdSide {
    Right = 0,
    Left = 1,
}

impl From<FdSide> for Side {
    fn from(s: FdSide) -> Side {
        match s {
            FdSide::Right => Side::Right,
            FdSide::Left => Side::Left,
        }
    }
}

/// Behavior of a grid function beyond its stored window. `value` is read
/// only for the `Constant` kind.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct FdTail {
    pub kind: FdTailKind,
    pub value: f64,
}

#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FdTailKind {
    /// Identically zero beyond the window.
    Zero = 0,
    /// Equal to `value` beyond the window.
    Constant = 1,
}

/// Truncated kernel coefficients of one fractional order.
pub struct FdCoeffTable(CoeffTable);

/// Values on a finite uniform window plus declared tail behavior.
pub struct FdGridFunction(GridFunction);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: FdStatus, msg: &str) -> FdStatus {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
    status
}

fn fail_from(e: FracError) -> FdStatus {
    let status = if e.is_validation() {
        FdStatus::InvalidArgument
    } else {
        FdStatus::NumericalFailure
    };
    fail(status, &e.to_string())
}

/// Panics must not unwind across the ABI boundary.
fn guarded(f: impl FnOnce() -> FdStatus) -> FdStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(FdStatus::NumericalFailure, "internal panic"))
}

macro_rules! try_ref {
    ($ptr:expr) => {
        match $ptr.as_ref() {
            Some(r) => r,
            None => return fail(FdStatus::NullPointer, concat!(stringify!($ptr), " is null")),
        }
    };
}

fn tail_model(tail: FdTail, what: &str) -> Result<TailModel, FdStatus> {
    match tail.kind {
        FdTailKind::Zero => Ok(TailModel::Zero),
        FdTailKind::Constant => {
            if tail.value.is_finite() {
                Ok(TailModel::Constant(tail.value))
            } else {
                Err(fail(
                    FdStatus::InvalidArgument,
                    &format!("{what} tail constant must be finite, got {}", tail.value),
                ))
            }
        }
    }
}

/// Copy the message for the most recent failure on this thread into `buf`,
/// NUL-terminated and truncated to `cap` bytes. Returns the full message
/// length in bytes, excluding the NUL.
#[no_mangle]
pub unsafe extern "C" fn fd_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Build the kernel table of order `alpha` in (0, 1), indices 0..=truncation.
#[no_mangle]
pub unsafe extern "C" fn fd_coeff_table_new(
    alpha: f64,
    truncation: usize,
    out: *mut *mut FdCoeffTable,
) -> FdStatus {
    guarded(|| {
        if out.is_null() {
            return fail(FdStatus::NullPointer, "out is null");
        }
        match FracOrder::new(alpha).and_then(|o| lambda_coeffs(o, truncation)) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(FdCoeffTable(t)));
                FdStatus::Ok
            }
            Err(e) => fail_from(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn fd_coeff_table_free(table: *mut FdCoeffTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of stored coefficients (truncation + 1), or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn fd_coeff_table_len(table: *const FdCoeffTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.values().len())
}

/// Copy all coefficients into `buf`, which must hold exactly
/// `fd_coeff_table_len` values.
#[no_mangle]
pub unsafe extern "C" fn fd_coeff_table_copy(
    table: *const FdCoeffTable,
    buf: *mut f64,
    len: usize,
) -> FdStatus {
    guarded(|| {
        let t = try_ref!(table);
        if buf.is_null() {
            return fail(FdStatus::NullPointer, "buf is null");
        }
        let values = t.0.values();
        if len != values.len() {
            return fail(
                FdStatus::InvalidArgument,
                &format!("buffer holds {len} values, table has {}", values.len()),
            );
        }
        std::ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        FdStatus::Ok
    })
}

/// Build a grid function from `len` values at sites n_lo, n_lo+1, ... with
/// step `h` and the declared tails.
#[no_mangle]
pub unsafe extern "C" fn fd_grid_function_new(
    h: f64,
    n_lo: i64,
    values: *const f64,
    len: usize,
    left: FdTail,
    right: FdTail,
    out: *mut *mut FdGridFunction,
) -> FdStatus {
    guarded(|| {
        if out.is_null() || values.is_null() {
            return fail(FdStatus::NullPointer, "out and values must be non-null");
        }
        if len == 0 || len > i64::MAX as usize {
            return fail(FdStatus::InvalidArgument, &format!("bad window length {len}"));
        }
        let left = match tail_model(left, "left") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let right = match tail_model(right, "right") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let window = std::slice::from_raw_parts(values, len).to_vec();
        let built = Grid::new(h, n_lo, n_lo + len as i64 - 1)
            .and_then(|g| GridFunction::from_values(g, window, left, right));
        match built {
            Ok(u) => {
                *out = Box::into_raw(Box::new(FdGridFunction(u)));
                FdStatus::Ok
            }
            Err(e) => fail_from(e),
        }
    })
}

#[no_mangle]
pub unsafe extern "C" fn fd_grid_function_free(u: *mut FdGridFunction) {
    if !u.is_null() {
        drop(Box::from_raw(u));
    }
}

/// One-sided fractional difference of `u` at site `n`, with a rigorous
/// truncation bound on the reported value.
#[no_mangle]
pub unsafe extern "C" fn fd_frac_apply(
    u: *const FdGridFunction,
    table: *const FdCoeffTable,
    n: i64,
    side: FdSide,
    value: *mut f64,
    bound: *mut f64,
) -> FdStatus {
    guarded(|| {
        let u = try_ref!(u);
        let t = try_ref!(table);
        if value.is_null() || bound.is_null() {
            return fail(FdStatus::NullPointer, "value and bound must be non-null");
        }
        let r = match side {
            FdSide::Right => frac_right(&u.0, &t.0, n),
            FdSide::Left => frac_left(&u.0, &t.0, n),
        };
        match r {
            Ok(r) => {
                *value = r.value;
                *bound = r.truncation_bound;
                FdStatus::Ok
            }
            Err(e) => fail_from(e),
        }
    })
}

/// Heat-semigroup action on `u` at time `t > 0` and site `n`, within
/// `tolerance` in (0, 1).
#[no_mangle]
pub unsafe extern "C" fn fd_heat_point(
    u: *const FdGridFunction,
    t: f64,
    n: i64,
    side: FdSide,
    tolerance: f64,
    value: *mut f64,
) -> FdStatus {
    guarded(|| {
        let u = try_ref!(u);
        if value.is_null() {
            return fail(FdStatus::NullPointer, "value is null");
        }
        match heat_point(&u.0, t, n, side.into(), tolerance) {
            Ok(v) => {
                *value = v;
                FdStatus::Ok
            }
            Err(e) => fail_from(e),
        }
    })
}

/// Poisson-semigroup action of order `gamma` in (0, 1) on `u` at time
/// `t > 0` and site `n`, within `tolerance` in (0, 1).
#[no_mangle]
pub unsafe extern "C" fn fd_poisson_point(
    u: *const FdGridFunction,
    gamma: f64,
    t: f64,
    n: i64,
    side: FdSide,
    tolerance: f64,
    value: *mut f64,
) -> FdStatus {
    guarded(|| {
        let u = try_ref!(u);
        if value.is_null() {
            return fail(FdStatus::NullPointer, "value is null");
        }
        let r = FracOrder::new(gamma)
            .and_then(|g| poisson_point(&u.0, g, t, n, side.into(), tolerance));
        match r {
            Ok(v) => {
                *value = v;
                FdStatus::Ok
            }
            Err(e) => fail_from(e),
        }
    })
}

//! The C surface exercised from Rust: status taxonomy, handle lifecycles,
//! and value parity with the underlying library calls.

use std::ptr;

use fracdiff::coefficients::{lambda_coeffs, FracOrder};
use fracdiff::fractional_ops::frac_right;
use fracdiff::grid::{Grid, GridFunction, TailModel};
use fracdiff::semigroups::{heat_point, poisson_point};
use fracdiff::Side;
use fracdiff_capi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    let n = unsafe { fd_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(buf.len() - 1)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

const ZERO: FdTail = FdTail { kind: FdTailKind::Zero, value: 0.0 };

/// A hat over [-2, 2] with zero tails, shared by the parity checks.
fn hat_handle() -> (*mut FdGridFunction, GridFunction) {
    let values = [0.0, 0.5, 1.0, 0.5, 0.0];
    let mut h: *mut FdGridFunction = ptr::null_mut();
    let status = unsafe {
        fd_grid_function_new(1.0, -2, values.as_ptr(), values.len(), ZERO, ZERO, &mut h)
    };
    assert_eq!(status, FdStatus::Ok);
    assert!(!h.is_null());
    let grid = Grid::new(1.0, -2, 2).unwrap();
    let u = GridFunction::from_values(grid, values.to_vec(), TailModel::Zero, TailModel::Zero)
        .unwrap();
    (h, u)
}

#[test]
fn coeff_table_round_trips() {
    let mut t: *mut FdCoeffTable = ptr::null_mut();
    assert_eq!(unsafe { fd_coeff_table_new(0.5, 4, &mut t) }, FdStatus::Ok);
    assert_eq!(unsafe { fd_coeff_table_len(t) }, 5);

    let mut buf = [0.0f64; 5];
    assert_eq!(
        unsafe { fd_coeff_table_copy(t, buf.as_mut_ptr(), buf.len()) },
        FdStatus::Ok
    );
    assert_eq!(buf, [1.0, -0.5, -0.125, -0.0625, -0.0390625]);

    // wrong buffer length is refused before any copy happens
    assert_eq!(
        unsafe { fd_coeff_table_copy(t, buf.as_mut_ptr(), 4) },
        FdStatus::InvalidArgument
    );
    unsafe { fd_coeff_table_free(t) };
    unsafe { fd_coeff_table_free(ptr::null_mut()) };
}

#[test]
fn status_taxonomy_and_error_messages() {
    let mut t: *mut FdCoeffTable = ptr::null_mut();
    assert_eq!(unsafe { fd_coeff_table_new(1.5, 4, &mut t) }, FdStatus::InvalidArgument);
    assert!(t.is_null(), "out must stay untouched on failure");
    assert!(last_error().contains("(0, 1)"), "{}", last_error());

    assert_eq!(unsafe { fd_coeff_table_new(0.5, 0, &mut t) }, FdStatus::InvalidArgument);
    assert_eq!(
        unsafe { fd_coeff_table_new(0.5, 4, ptr::null_mut()) },
        FdStatus::NullPointer
    );
    assert_eq!(unsafe { fd_coeff_table_len(ptr::null()) }, 0);

    // messages truncate to the buffer but report their full length
    assert_eq!(unsafe { fd_coeff_table_new(0.25, 2, &mut t) }, FdStatus::InvalidArgument);
    let full = unsafe { fd_last_error(ptr::null_mut(), 0) };
    let mut tiny = [0 as std::ffi::c_char; 8];
    assert_eq!(unsafe { fd_last_error(tiny.as_mut_ptr(), tiny.len()) }, full);
    assert!(full > 7);
    assert_eq!(tiny[7], 0);

    let mut u: *mut FdGridFunction = ptr::null_mut();
    let vals = [1.0, 2.0];
    let bad = FdTail { kind: FdTailKind::Constant, value: f64::NAN };
    assert_eq!(
        unsafe { fd_grid_function_new(1.0, 0, vals.as_ptr(), 2, bad, ZERO, &mut u) },
        FdStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { fd_grid_function_new(0.0, 0, vals.as_ptr(), 2, ZERO, ZERO, &mut u) },
        FdStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { fd_grid_function_new(1.0, 0, vals.as_ptr(), 0, ZERO, ZERO, &mut u) },
        FdStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { fd_grid_function_new(1.0, 0, ptr::null(), 2, ZERO, ZERO, &mut u) },
        FdStatus::NullPointer
    );
}

#[test]
fn operators_match_the_library() {
    let (h, u) = hat_handle();
    let table = lambda_coeffs(FracOrder::new(0.5).unwrap(), 200).unwrap();
    let mut ct: *mut FdCoeffTable = ptr::null_mut();
    assert_eq!(unsafe { fd_coeff_table_new(0.5, 200, &mut ct) }, FdStatus::Ok);

    for n in -3..=3 {
        let (mut v, mut b) = (f64::NAN, f64::NAN);
        let status = unsafe { fd_frac_apply(h, ct, n, FdSide::Right, &mut v, &mut b) };
        assert_eq!(status, FdStatus::Ok);
        let want = frac_right(&u, &table, n).unwrap();
        assert_eq!(v, want.value, "n={n}");
        assert_eq!(b, want.truncation_bound);
    }

    let mut v = f64::NAN;
    assert_eq!(
        unsafe { fd_heat_point(h, 2.5, 1, FdSide::Left, 1e-10, &mut v) },
        FdStatus::Ok
    );
    assert_eq!(v, heat_point(&u, 2.5, 1, Side::Left, 1e-10).unwrap());

    assert_eq!(
        unsafe { fd_poisson_point(h, 0.7, 3.0, 0, FdSide::Right, 1e-10, &mut v) },
        FdStatus::Ok
    );
    let g = FracOrder::new(0.7).unwrap();
    assert_eq!(v, poisson_point(&u, g, 3.0, 0, Side::Right, 1e-10).unwrap());

    // rejected tolerances never touch the out-pointer
    v = 42.0;
    assert_eq!(
        unsafe { fd_heat_point(h, 2.5, 1, FdSide::Right, 0.0, &mut v) },
        FdStatus::InvalidArgument
    );
    assert_eq!(v, 42.0);
    assert_eq!(
        unsafe { fd_frac_apply(ptr::null(), ct, 0, FdSide::Right, &mut v, &mut v) },
        FdStatus::NullPointer
    );

    unsafe { fd_coeff_table_free(ct) };
    unsafe { fd_grid_function_free(h) };
    unsafe { fd_grid_function_free(ptr::null_mut()) };
}

#[test]
fn version_and_header_artifacts() {
    let v = unsafe { std::ffi::CStr::from_ptr(fd_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));

    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("include")
        .join("fracdiff.h");
    let text = std::fs::read_to_string(header).expect("build script wrote the header");
    for needle in [
        "#ifndef FRACDIFF_H",
        "typedef struct FdCoeffTable FdCoeffTable;",
        "typedef struct FdGridFunction FdGridFunction;",
        "FdStatus fd_poisson_point",
        "FD_STATUS_NUMERICAL_FAILURE",
    ] {
        assert!(text.contains(needle), "header lacks {needle:?}");
    }
}

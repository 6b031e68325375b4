//! One-sided fractional difference operators on uniform grids.
//!
//! The core object is the order-α power of the one-sided difference,
//! realized as a convolution against the kernel Λ^α with Λ^α(0) = 1 and
//! all later weights negative. Around it the crate builds the pieces that
//! make the operator usable and testable:
//!
//! * kernel tables for both signs of the power ([`coefficients`]),
//! * grid functions with explicit tail models and truncation bounds
//!   ([`grid`], [`fractional_ops`]),
//! * the associated heat and Poisson semigroups, the Bessel-K machinery
//!   behind the latter, and the extension-problem view ([`semigroups`]),
//! * continuous-side reference operators (Marchaud integrals, shifted
//!   differences) and discrete-vs-continuous convergence studies
//!   ([`continuous`]),
//! * maximal functions, square functions, and kernel-regularity checks
//!   ([`harmonic`]).

pub mod cli;
pub mod coefficients;
pub mod continuous;
pub mod error;
pub mod fractional_ops;
pub mod grid;
pub mod harmonic;
pub mod quadrature;
pub mod semigroups;
pub mod special;

pub use error::{FracError, Result, Side};

use std::path::{Path, PathBuf};

/// `<file>.meta.json` next to `<file>`: where an output's JSON sidecar lives.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map_or_else(std::ffi::OsString::new, |n| n.to_owned());
    name.push(".meta.json");
    path.with_file_name(name)
}

/// Write via a temp file in the same directory plus rename, so a reader
/// never observes a partially written output.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

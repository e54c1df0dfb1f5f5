//! Exact Fredholm data, spectra and 2×2 upper-triangular completion problems
//! for a class of structured operators built from shifts and diagonal
//! operators, with a finite-truncation numerical cross-check.

pub mod classifier;
pub mod completion;
pub mod error;
pub mod gen;
pub mod numeric;
pub mod operator;
pub mod oracle;
pub mod region;
pub mod spectra;

pub use error::{Error, Result};

//! Reduced density matrices of qubit states and unique reconstruction of
//! W-class states from their two-party marginals.

// `!(x <= tol)` is used on purpose so that NaN fails tolerance checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bitindex;
pub mod cli;
pub mod error;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod ptrace;
pub mod reconstruct;
pub mod states;
pub mod tolerance;

pub use error::{Error, Result};
pub use tolerance::Tolerances;

//! Exact computational kernel for p-adic power series whose coefficients obey
//! log-growth ("tempered") norm bounds.
//!
//! The crate works with truncated series over exact rationals and keeps two
//! promises everywhere: all arithmetic is exact (no floats), and every
//! operation records the window on which its output is trustworthy. On top of
//! the series layer it provides:
//!
//! * weighted sup norms and the division lemmas with their norm certificates
//!   ([`series`]),
//! * a catalog of opens of the affine line with membership tests, the
//!   cover/duality split at infinity ([`opens`]),
//! * formal solution of linear differential systems and growth transfer
//!   experiments ([`ode`]),
//! * Koszul-style norm reduction and presentation changes for tempered tubes
//!   ([`tube`]),
//! * truncated de Rham and Cech-de Rham complexes with exact rank
//!   computations ([`derham`]).
//!
//! The runnable examples under `examples/` are the guided tour; the `tempered`
//! binary drives the same operations from text files in batch mode.

pub mod cli;
pub mod derham;
pub mod error;
pub mod format;
pub mod linalg;
pub mod ode;
pub mod opens;
pub mod padic;
pub mod series;
pub mod tube;

pub use error::{Error, Result};

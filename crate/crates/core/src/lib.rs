//! Ergodic theorems for order-2 U-statistics, checked numerically.
//!
//! - [`dyadic`]: points of `[0, 1)` as lazily generated digit streams; the
//!   doubling map is a digit shift.
//! - [`processes`]: stationary sample paths (doubling map, rotation, i.i.d.
//!   uniform, Gaussian AR(1)) and Monte-Carlo product integrals.
//! - [`kernel`] and [`ustat`]: kernels and the U/V-statistic engine.
//! - [`oscillate`]: a bounded kernel whose U-statistics oscillate, in exact
//!   arithmetic.
//! - [`centered`]: an unbounded kernel whose centered U-statistic is
//!   asymptotically normal yet not convergent in probability.
//! - [`lab`]: convergence experiments for well-behaved kernels.
//! - [`report`]: CSV/JSON report tables.

pub mod centered;
pub mod dyadic;
pub mod error;
pub mod kernel;
pub mod lab;
pub mod oscillate;
pub mod processes;
pub mod report;
pub mod stats;
pub mod ustat;

pub use error::{Error, Result};

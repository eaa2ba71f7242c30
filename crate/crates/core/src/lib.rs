//! Multilinear (checkerboard) copula for count data.
//!
//! * [`margin`]: discrete margins, their piecewise-linear continuation and
//!   the interpolation weights on the range partition.
//! * [`checkerboard`]: the checkerboard copula of a discrete joint pmf with
//!   exact population functionals.
//! * [`empirical`]: mid-ranks, hat functions and the empirical checkerboard
//!   copula of a sample.
//! * [`statistics`]: Kendall, Spearman, chi-squared, G-squared and
//!   Cramer-von Mises statistics.
//! * [`inference`]: the multiplier-bootstrap independence test and a Monte
//!   Carlo chi-squared comparator.
//! * [`samplers`]: Clayton/Gaussian/independence count-data generators.
//! * [`simulation`]: the seeded simulation harness.
//! * [`oracles`]: slow brute-force reference implementations used by tests.

pub mod checkerboard;
pub mod empirical;
pub mod error;
mod grid;
pub mod inference;
pub mod io;
pub mod margin;
pub mod oracles;
pub mod samplers;
pub mod simulation;
pub mod statistics;

pub use checkerboard::{CheckerboardCopula, JointPmf};
pub use empirical::RankedSample;
pub use error::{Error, Result};
pub use inference::{MultiplierConfig, MultiplierLaw, TestReport};
pub use margin::{DiscreteMargin, MarginSpec};
pub use statistics::ContingencyTable;

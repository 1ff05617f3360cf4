//! Variance ratio test for the null of no cointegration, with ADF, MSB and
//! Ẑα residual-based competitors and the Monte Carlo machinery for their
//! limiting distributions.

pub mod asymptotics;
pub mod detrend;
pub mod dgp;
pub mod error;
pub mod experiments;
pub mod numeric;
pub mod parallel;
pub mod residuals;
pub mod statistics;

pub use detrend::{DeterministicCase, DetrendMode};
pub use error::{Error, Result};
pub use numeric::{RngStream, SeriesMatrix};
pub use residuals::{cointegrating_residuals, ResidualSeries};
pub use statistics::{run_test, Criterion, TestKind, TestOptions, TestStatistic};

//! Cointegrating-regression residuals from jointly detrended data.

use crate::detrend::{gls_detrend, ols_detrend, DeterministicCase, DetrendMode};
use crate::error::{Error, Result};
use crate::numeric::{least_squares, SeriesMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries {
    pub u_hat: Vec<f64>,
    pub beta_hat: Vec<f64>,
    pub mode: DetrendMode,
    pub case: DeterministicCase,
}

/// Detrend `(y, X)` and regress detrended `y` on detrended `X` without intercept.
pub fn cointegrating_residuals(
    y: &[f64],
    x: &SeriesMatrix,
    case: DeterministicCase,
    mode: DetrendMode,
) -> Result<ResidualSeries> {
    let t = y.len();
    let m = x.ncols();
    if x.nrows() != t {
        return Err(Error::DimensionMismatch(format!(
            "y has {t} observations, X has {}",
            x.nrows()
        )));
    }
    if m == 0 {
        return Err(Error::DimensionMismatch("at least one regressor is required".into()));
    }
    if t <= m + case.dimension() + 2 {
        return Err(Error::SampleTooSmall(format!(
            "T = {t} must exceed m + p + 2 = {}",
            m + case.dimension() + 2
        )));
    }
    mode.validate(case)?;
    let z = SeriesMatrix::from_column(y.to_vec())?.hstack(x)?;
    let detrended = match mode {
        DetrendMode::Ols => ols_detrend(&z, case)?,
        DetrendMode::Gls { c_bar } => gls_detrend(&z, case, c_bar)?,
    };
    let x_tilde = detrended.as_matrix().columns(1, m).into_owned();
    let y_tilde = detrended.column(0);
    let mut fit = least_squares(&SeriesMatrix::from_matrix(x_tilde), y_tilde)?;
    let rss: f64 = fit.residuals.iter().map(|u| u * u).sum();
    let tss: f64 = y_tilde.iter().map(|v| v * v).sum();
    if rss <= 1e-24 * tss {
        // An exact fit leaves only rounding noise; report it as exact zeros.
        fit.residuals.iter_mut().for_each(|u| *u = 0.0);
    }
    Ok(ResidualSeries {
        u_hat: fit.residuals,
        beta_hat: fit.coefficients,
        mode,
        case,
    })
}

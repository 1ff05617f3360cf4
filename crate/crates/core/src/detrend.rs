//! Removal of deterministic components by OLS or by GLS quasi-differencing.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{QrFactor, SeriesMatrix};

/// Deterministic specification: nothing, an intercept, or intercept and linear trend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DeterministicCase {
    D0,
    D1,
    D2,
}

impl DeterministicCase {
    pub const ALL: [DeterministicCase; 3] = [Self::D0, Self::D1, Self::D2];

    /// Number of deterministic regressors.
    pub fn dimension(self) -> usize {
        match self {
            Self::D0 => 0,
            Self::D1 => 1,
            Self::D2 => 2,
        }
    }
}

impl fmt::Display for DeterministicCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::D0 => "D0",
            Self::D1 => "D1",
            Self::D2 => "D2",
        })
    }
}

impl std::str::FromStr for DeterministicCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "D0" => Ok(Self::D0),
            "D1" => Ok(Self::D1),
            "D2" => Ok(Self::D2),
            other => Err(Error::InvalidCase(format!("unknown case '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DetrendMode {
    Ols,
    Gls { c_bar: f64 },
}

impl DetrendMode {
    pub fn validate(self, case: DeterministicCase) -> Result<()> {
        match self {
            Self::Ols => Ok(()),
            Self::Gls { .. } if case == DeterministicCase::D0 => Err(Error::InvalidCase(
                "GLS detrending needs deterministic terms (D1 or D2)".into(),
            )),
            Self::Gls { c_bar } if !(c_bar <= 0.0) || !c_bar.is_finite() => Err(
                Error::InvalidConfig(format!("c_bar must be finite and nonpositive, got {c_bar}")),
            ),
            Self::Gls { .. } => Ok(()),
        }
    }

    pub fn is_gls(self) -> bool {
        matches!(self, Self::Gls { .. })
    }
}

impl fmt::Display for DetrendMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ols => f.write_str("ols"),
            Self::Gls { c_bar } => write!(f, "gls({c_bar})"),
        }
    }
}

impl std::str::FromStr for DetrendMode {
    type Err = Error;

    /// Accepts `ols`, `gls(<c_bar>)` or `gls:<c_bar>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "ols" {
            return Ok(Self::Ols);
        }
        let inner = s
            .strip_prefix("gls(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("gls:"));
        match inner.map(|v| v.trim().parse::<f64>()) {
            Some(Ok(c_bar)) => Ok(Self::Gls { c_bar }),
            _ => Err(Error::InvalidConfig(format!("unknown detrend mode '{s}'"))),
        }
    }
}

/// `T x p` matrix of deterministic regressors, `t = 1..T`.
pub fn deterministic_regressors(case: DeterministicCase, t: usize) -> SeriesMatrix {
    let mut d = DMatrix::zeros(t, case.dimension());
    for i in 0..t {
        if case.dimension() >= 1 {
            d[(i, 0)] = 1.0;
        }
        if case.dimension() == 2 {
            d[(i, 1)] = (i + 1) as f64;
        }
    }
    SeriesMatrix::from_matrix(d)
}

/// Subtract from each column its OLS projection on the deterministic regressors.
pub fn ols_detrend(z: &SeriesMatrix, case: DeterministicCase) -> Result<SeriesMatrix> {
    let t = z.nrows();
    if case == DeterministicCase::D0 {
        return Ok(z.clone());
    }
    if t <= case.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "{t} observations cannot be detrended under {case}"
        )));
    }
    let d = deterministic_regressors(case, t);
    project_out(z, z, &d, &d)
}

/// GLS detrending with local-to-unity parameter `c_bar`.
///
/// The deterministic coefficients are fitted on quasi-differenced data
/// (first observation kept in levels) and removed from the levels.
pub fn gls_detrend(z: &SeriesMatrix, case: DeterministicCase, c_bar: f64) -> Result<SeriesMatrix> {
    DetrendMode::Gls { c_bar }.validate(case)?;
    let t = z.nrows();
    if t < 3 {
        return Err(Error::SampleTooSmall(format!(
            "GLS detrending needs at least 3 observations, got {t}"
        )));
    }
    if c_bar == 0.0 {
        log::warn!("c_bar = 0 makes GLS detrending a pure first difference");
    }
    let rho = 1.0 + c_bar / t as f64;
    let d = deterministic_regressors(case, t);
    let dq = quasi_difference(&d, rho);
    let zq = quasi_difference(z, rho);
    project_out(z, &zq, &d, &dq)
}

fn quasi_difference(m: &SeriesMatrix, rho: f64) -> SeriesMatrix {
    let src = m.as_matrix();
    let mut out = src.clone();
    for i in 1..src.nrows() {
        for j in 0..src.ncols() {
            out[(i, j)] = src[(i, j)] - rho * src[(i - 1, j)];
        }
    }
    SeriesMatrix::from_matrix(out)
}

/// `levels - d * coef`, with `coef` from regressing `fit_y` on `fit_x` column by column.
fn project_out(
    levels: &SeriesMatrix,
    fit_y: &SeriesMatrix,
    d: &SeriesMatrix,
    fit_x: &SeriesMatrix,
) -> Result<SeriesMatrix> {
    let qr = QrFactor::new(fit_x.as_matrix().clone())?;
    let mut out = levels.as_matrix().clone();
    for j in 0..levels.ncols() {
        let qty = qr.q_transpose_mul(fit_y.column(j));
        let coef = qr.leading_coefficients(&qty, qr.ncols());
        for i in 0..levels.nrows() {
            let fitted: f64 = coef.iter().enumerate().map(|(c, b)| b * d.get(i, c)).sum();
            out[(i, j)] -= fitted;
        }
    }
    Ok(SeriesMatrix::from_matrix(out))
}

//! Residual-based no-cointegration statistics and their tuning machinery.

mod adf;
mod pipeline;
mod vr;
mod zalpha;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use adf::{adf_regression, adf_statistic, default_pmax, msb_statistic, select_lag, AdfRegression, LagSelection};
pub use pipeline::{run_test, statistic_from_residuals, TestOptions, TestSettings, TestStatistic};
pub use vr::vr_statistic;
pub use zalpha::{
    andrews_bandwidth, andrews_bandwidth_from_rho, bartlett_kernel, qs_kernel, zalpha, zalpha_statistic,
    ZalphaResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TestKind {
    Vr,
    Adf,
    Msb,
    Zalpha,
}

impl TestKind {
    pub const ALL: [TestKind; 4] = [Self::Vr, Self::Adf, Self::Msb, Self::Zalpha];

    pub fn uses_lags(self) -> bool {
        matches!(self, Self::Adf | Self::Msb)
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Vr => "VR",
            Self::Adf => "ADF",
            Self::Msb => "MSB",
            Self::Zalpha => "Zalpha",
        })
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "vr" => Ok(Self::Vr),
            "adf" => Ok(Self::Adf),
            "msb" => Ok(Self::Msb),
            "zalpha" | "za" | "z_alpha" => Ok(Self::Zalpha),
            other => Err(Error::InvalidConfig(format!("unknown test '{other}'"))),
        }
    }
}

/// Information criterion for the ADF/MSB lag order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Criterion {
    Aic,
    Bic,
    Maic,
    Mbic,
}

impl Criterion {
    /// Modified criteria select the lag on OLS-detrended residuals.
    pub fn is_modified(self) -> bool {
        matches!(self, Self::Maic | Self::Mbic)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Aic => "AIC",
            Self::Bic => "BIC",
            Self::Maic => "MAIC",
            Self::Mbic => "MBIC",
        })
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "aic" => Ok(Self::Aic),
            "bic" => Ok(Self::Bic),
            "maic" => Ok(Self::Maic),
            "mbic" => Ok(Self::Mbic),
            other => Err(Error::InvalidConfig(format!("unknown criterion '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelKind {
    QuadraticSpectral,
    Bartlett,
}

impl KernelKind {
    pub fn weight(self, x: f64) -> f64 {
        match self {
            Self::QuadraticSpectral => qs_kernel(x),
            Self::Bartlett => bartlett_kernel(x),
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::QuadraticSpectral => "qs",
            Self::Bartlett => "bartlett",
        })
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "qs" | "quadratic-spectral" | "quadraticspectral" => Ok(Self::QuadraticSpectral),
            "bartlett" => Ok(Self::Bartlett),
            other => Err(Error::InvalidConfig(format!("unknown kernel '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bandwidth {
    Andrews,
    Fixed(f64),
}

impl FromStr for Bandwidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim().to_ascii_lowercase();
        if s == "andrews" || s == "auto" {
            return Ok(Self::Andrews);
        }
        match s.parse::<f64>() {
            Ok(b) if b >= 0.0 && b.is_finite() => Ok(Self::Fixed(b)),
            _ => Err(Error::InvalidConfig(format!("bandwidth must be 'andrews' or a nonnegative number, got '{s}'"))),
        }
    }
}

/// Which autocovariance lags enter the long-run variance sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LagWindow {
    /// Lags `1..=floor(b)`.
    Truncated,
    /// All lags `1..T-2`, weighted by the kernel.
    Full,
}

impl fmt::Display for LagWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Truncated => "truncated",
            Self::Full => "full",
        })
    }
}

impl FromStr for LagWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "truncated" => Ok(Self::Truncated),
            "full" => Ok(Self::Full),
            other => Err(Error::InvalidConfig(format!("unknown lag window '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kernel: KernelKind,
    pub bandwidth: Bandwidth,
    pub window: LagWindow,
}

impl Default for KernelSpec {
    fn default() -> Self {
        Self {
            kernel: KernelKind::QuadraticSpectral,
            bandwidth: Bandwidth::Andrews,
            window: LagWindow::Truncated,
        }
    }
}

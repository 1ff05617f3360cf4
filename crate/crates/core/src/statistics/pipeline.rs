use serde::{Deserialize, Serialize};

use super::adf::msb_from_regression;
use super::{adf_regression, default_pmax, select_lag, vr_statistic, zalpha, Criterion, KernelKind, KernelSpec, LagWindow, TestKind};
use crate::detrend::{DeterministicCase, DetrendMode};
use crate::error::{Error, Result};
use crate::numeric::SeriesMatrix;
use crate::residuals::{cointegrating_residuals, ResidualSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOptions {
    pub criterion: Criterion,
    /// Upper lag bound; `None` uses `floor(12 (T/100)^{1/4})`.
    pub p_max: Option<usize>,
    /// Fixed lag order, bypassing selection.
    pub lag: Option<usize>,
    pub kernel: KernelSpec,
}

impl Default for TestOptions {
    fn default() -> Self {
        Self {
            criterion: Criterion::Aic,
            p_max: None,
            lag: None,
            kernel: KernelSpec::default(),
        }
    }
}

/// Every tuning choice that produced a statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSettings {
    pub case: DeterministicCase,
    pub detrend: DetrendMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lag: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<Criterion>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lag_window: Option<LagWindow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lrv_nonpositive: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestStatistic {
    pub kind: TestKind,
    pub value: f64,
    pub settings: TestSettings,
}

/// Detrend, estimate the cointegrating regression and compute one statistic.
pub fn run_test(
    y: &[f64],
    x: &SeriesMatrix,
    case: DeterministicCase,
    mode: DetrendMode,
    kind: TestKind,
    options: &TestOptions,
) -> Result<TestStatistic> {
    check_combination(kind, mode)?;
    let residuals = cointegrating_residuals(y, x, case, mode)?;
    let ols = if mode.is_gls() && kind.uses_lags() && options.lag.is_none() && options.criterion.is_modified() {
        Some(cointegrating_residuals(y, x, case, DetrendMode::Ols)?)
    } else {
        None
    };
    statistic_from_residuals(&residuals, ols.as_ref(), kind, options)
}

fn check_combination(kind: TestKind, mode: DetrendMode) -> Result<()> {
    if kind == TestKind::Zalpha && mode.is_gls() {
        return Err(Error::InvalidConfig("Zalpha is only defined for OLS detrending".into()));
    }
    Ok(())
}

/// Statistic from precomputed residuals. `ols_for_lags` supplies the
/// OLS-detrended residuals that modified criteria select the lag on when
/// `residuals` come from GLS detrending.
pub fn statistic_from_residuals(
    residuals: &ResidualSeries,
    ols_for_lags: Option<&ResidualSeries>,
    kind: TestKind,
    options: &TestOptions,
) -> Result<TestStatistic> {
    check_combination(kind, residuals.mode)?;
    let u = &residuals.u_hat;
    let mut settings = TestSettings {
        case: residuals.case,
        detrend: residuals.mode,
        lag: None,
        criterion: None,
        p_max: None,
        kernel: None,
        bandwidth: None,
        lag_window: None,
        lrv_nonpositive: None,
    };
    let value = match kind {
        TestKind::Vr => vr_statistic(u)?,
        TestKind::Adf | TestKind::Msb => {
            let p = match options.lag {
                Some(p) => p,
                None => {
                    let p_max = options.p_max.unwrap_or_else(|| default_pmax(u.len()));
                    let lag_u = if options.criterion.is_modified() && residuals.mode.is_gls() {
                        &ols_for_lags
                            .ok_or_else(|| {
                                Error::InvalidConfig("modified criteria under GLS need OLS residuals".into())
                            })?
                            .u_hat
                    } else {
                        u
                    };
                    settings.criterion = Some(options.criterion);
                    settings.p_max = Some(p_max);
                    select_lag(lag_u, options.criterion, p_max)?.chosen_p
                }
            };
            settings.lag = Some(p);
            let reg = adf_regression(u, p)?;
            if kind == TestKind::Adf {
                reg.t_ratio()
            } else {
                msb_from_regression(u, &reg)?
            }
        }
        TestKind::Zalpha => {
            let z = zalpha(u, options.kernel)?;
            settings.kernel = Some(options.kernel.kernel);
            settings.bandwidth = Some(z.bandwidth);
            settings.lag_window = Some(options.kernel.window);
            settings.lrv_nonpositive = Some(z.lrv_nonpositive());
            z.value
        }
    };
    Ok(TestStatistic { kind, value, settings })
}

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::Criterion;
use crate::error::{Error, Result};
use crate::numeric::QrFactor;

/// Fit of `Δû_t = b0 û_{t-1} + Σ_j π_j Δû_{t-j} + r_t`, `t = p+2..T`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdfRegression {
    pub p: usize,
    pub b0: f64,
    pub se_b0: f64,
    pub pi: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl AdfRegression {
    pub fn t_ratio(&self) -> f64 {
        self.b0 / self.se_b0
    }

    pub fn pi_sum(&self) -> f64 {
        self.pi.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagSelection {
    pub criterion: Criterion,
    pub p_max: usize,
    pub chosen_p: usize,
    /// Criterion value for each `p = 0..=p_max` (non-finite values never win).
    pub values: Vec<f64>,
}

/// Design and response of the auxiliary regression with `lags` lagged
/// differences on rows `t = first..T` (1-based `t`; `first >= lags + 2`).
fn auxiliary_design(u: &[f64], lags: usize, first: usize) -> (DMatrix<f64>, Vec<f64>) {
    let t = u.len();
    let rows = t + 1 - first;
    let mut x = DMatrix::zeros(rows, lags + 1);
    let mut y = Vec::with_capacity(rows);
    for (r, i) in (first - 1..t).enumerate() {
        y.push(u[i] - u[i - 1]);
        x[(r, 0)] = u[i - 1];
        for j in 1..=lags {
            x[(r, j)] = u[i - j] - u[i - j - 1];
        }
    }
    (x, y)
}

fn factor(x: DMatrix<f64>, what: &str) -> Result<QrFactor> {
    QrFactor::new(x).map_err(|e| match e {
        Error::DimensionMismatch(_) => Error::SampleTooSmall(format!("too few observations for {what}")),
        other => other,
    })
}

pub fn adf_regression(u_hat: &[f64], p: usize) -> Result<AdfRegression> {
    let t = u_hat.len();
    if t < p + 4 {
        return Err(Error::SampleTooSmall(format!("ADF with p = {p} needs T >= {}, got {t}", p + 4)));
    }
    let (x, y) = auxiliary_design(u_hat, p, p + 2);
    let n = y.len();
    let k = p + 1;
    let qr = factor(x, "the ADF regression")?;
    let fit = qr.solve(&y)?;
    let rss: f64 = fit.residuals.iter().map(|r| r * r).sum();
    let s2 = rss / (n - k) as f64;
    let se_b0 = (s2 * qr.inverse_gram_diagonal(0)).sqrt();
    if !(se_b0 > 0.0) {
        return Err(Error::DegenerateResiduals);
    }
    Ok(AdfRegression {
        p,
        b0: fit.coefficients[0],
        se_b0,
        pi: fit.coefficients[1..].to_vec(),
        residuals: fit.residuals,
    })
}

/// t-ratio of `b0` with `s^2 = RSS / (n - k)`.
pub fn adf_statistic(u_hat: &[f64], p: usize) -> Result<f64> {
    Ok(adf_regression(u_hat, p)?.t_ratio())
}

pub fn msb_statistic(u_hat: &[f64], p: usize) -> Result<f64> {
    msb_from_regression(u_hat, &adf_regression(u_hat, p)?)
}

pub(crate) fn msb_from_regression(u_hat: &[f64], reg: &AdfRegression) -> Result<f64> {
    let t = u_hat.len() as f64;
    let one_minus = 1.0 - reg.pi_sum();
    if one_minus.abs() <= 1e-6 {
        return Err(Error::NearSingularArSum(one_minus));
    }
    let s2_rp = reg.residuals.iter().map(|r| r * r).sum::<f64>() / t;
    let s2 = s2_rp / (one_minus * one_minus);
    let level = u_hat.iter().map(|u| u * u).sum::<f64>() / (t * t);
    if !(s2 > 0.0) {
        return Err(Error::DegenerateResiduals);
    }
    Ok((level / s2).sqrt())
}

/// `floor(12 (T/100)^{1/4})`.
pub fn default_pmax(t: usize) -> usize {
    (12.0 * (t as f64 / 100.0).powf(0.25) + 1e-12).floor() as usize
}

/// Lag order minimizing `criterion` over `0..=p_max`, every candidate fitted
/// on the common sample `t = p_max+2..T`. Ties go to the smaller lag.
pub fn select_lag(u_hat: &[f64], criterion: Criterion, p_max: usize) -> Result<LagSelection> {
    let t = u_hat.len();
    if t <= p_max + 3 {
        return Err(Error::SampleTooSmall(format!("lag selection with p_max = {p_max} needs T > {}", p_max + 3)));
    }
    let (x, y) = auxiliary_design(u_hat, p_max, p_max + 2);
    let lagged_ss: f64 = x.column(0).iter().map(|v| v * v).sum();
    // Nested regressions share one QR: the leading k columns of Q span the
    // leading k regressors, so RSS_p is the tail sum of squares of Q'y.
    let qr = factor(x, "lag selection")?;
    let qty = qr.q_transpose_mul(&y);
    let tf = t as f64;
    let eff = (t - p_max) as f64;
    let values: Vec<f64> = (0..=p_max)
        .map(|p| {
            let rss: f64 = qty.iter().skip(p + 1).map(|v| v * v).sum();
            let s2 = rss / tf;
            let pf = p as f64;
            match criterion {
                Criterion::Aic => s2.ln() + 2.0 * pf / tf,
                Criterion::Bic => s2.ln() + pf * tf.ln() / tf,
                Criterion::Maic | Criterion::Mbic => {
                    let s2m = tf / eff * s2;
                    let b0 = qr.leading_coefficients(&qty, p + 1)[0];
                    let tau = b0 * b0 * lagged_ss / s2m;
                    let penalty = if criterion == Criterion::Maic { 2.0 } else { eff.ln() };
                    s2m.ln() + penalty * (pf + tau) / eff
                }
            }
        })
        .collect();
    let chosen_p = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .fold(None::<(usize, f64)>, |best, (p, &v)| match best {
            Some((_, bv)) if bv <= v => best,
            _ => Some((p, v)),
        })
        .map(|(p, _)| p)
        .ok_or(Error::DegenerateResiduals)?;
    Ok(LagSelection {
        criterion,
        p_max,
        chosen_p,
        values,
    })
}

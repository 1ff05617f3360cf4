use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{Bandwidth, KernelKind, KernelSpec, LagWindow};
use crate::error::{Error, Result};

const RHO_CLAMP: f64 = 0.97;

/// Quadratic spectral kernel, `K(0) = 1`.
pub fn qs_kernel(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // Series expansion avoids cancellation: 1 - (6π/5)^2 x^2 / 10.
        return 1.0 - 0.144 * PI * PI * x * x;
    }
    let z = 6.0 * PI * x / 5.0;
    25.0 / (12.0 * PI * PI * x * x) * (z.sin() / z - z.cos())
}

pub fn bartlett_kernel(x: f64) -> f64 {
    (1.0 - x.abs()).max(0.0)
}

/// Andrews (1991) AR(1) plug-in bandwidth for a given autoregressive coefficient.
pub fn andrews_bandwidth_from_rho(rho: f64, n: usize, kernel: KernelKind) -> f64 {
    let rho = rho.clamp(-RHO_CLAMP, RHO_CLAMP);
    let n = n as f64;
    match kernel {
        KernelKind::QuadraticSpectral => {
            let alpha2 = 4.0 * rho * rho / (1.0 - rho).powi(4);
            1.3221 * (alpha2 * n).powf(0.2)
        }
        KernelKind::Bartlett => {
            let alpha1 = 4.0 * rho * rho / ((1.0 - rho).powi(2) * (1.0 + rho).powi(2));
            1.1447 * (alpha1 * n).powf(1.0 / 3.0)
        }
    }
}

/// Plug-in bandwidth from the first-order autocorrelation of `k_hat`.
pub fn andrews_bandwidth(k_hat: &[f64], kernel: KernelKind) -> Result<f64> {
    if k_hat.len() < 4 {
        return Err(Error::SampleTooSmall(format!(
            "bandwidth selection needs at least 4 residuals, got {}",
            k_hat.len()
        )));
    }
    let (num, den) = k_hat
        .windows(2)
        .fold((0.0, 0.0), |(n, d), w| (n + w[1] * w[0], d + w[0] * w[0]));
    if den == 0.0 {
        return Err(Error::DegenerateResiduals);
    }
    Ok(andrews_bandwidth_from_rho(num / den, k_hat.len(), kernel))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZalphaResult {
    pub value: f64,
    pub alpha_hat: f64,
    pub bandwidth: f64,
    pub s2_k: f64,
    pub s2_tb: f64,
}

impl ZalphaResult {
    pub fn lrv_nonpositive(&self) -> bool {
        !(self.s2_tb > 0.0)
    }
}

/// Phillips' semiparametric `Ẑα` with a kernel long-run variance estimate.
pub fn zalpha(u_hat: &[f64], spec: KernelSpec) -> Result<ZalphaResult> {
    let t = u_hat.len();
    if t < 4 {
        return Err(Error::SampleTooSmall(format!("Zalpha needs T >= 4, got {t}")));
    }
    let lagged_ss: f64 = u_hat[..t - 1].iter().map(|u| u * u).sum();
    if lagged_ss == 0.0 {
        return Err(Error::DegenerateResiduals);
    }
    let cross: f64 = u_hat.windows(2).map(|w| w[1] * w[0]).sum();
    let alpha_hat = cross / lagged_ss;
    let k: Vec<f64> = u_hat.windows(2).map(|w| w[1] - alpha_hat * w[0]).collect();
    let tm1 = (t - 1) as f64;
    let s2_k = k.iter().map(|v| v * v).sum::<f64>() / tm1;
    if s2_k == 0.0 {
        return Err(Error::DegenerateResiduals);
    }
    let bandwidth = match spec.bandwidth {
        Bandwidth::Andrews => andrews_bandwidth(&k, spec.kernel)?,
        Bandwidth::Fixed(b) => b,
    };
    let max_lag = match spec.window {
        LagWindow::Truncated => (bandwidth.floor() as usize).min(k.len() - 1),
        LagWindow::Full => k.len() - 1,
    };
    let mut correction = 0.0;
    if bandwidth > 0.0 {
        for h in 1..=max_lag {
            let w = spec.kernel.weight(h as f64 / bandwidth);
            if w == 0.0 {
                continue;
            }
            let gamma: f64 = k[h..].iter().zip(&k).map(|(a, b)| a * b).sum();
            correction += w * gamma;
        }
    }
    let s2_tb = s2_k + 2.0 * correction / tm1;
    if !(s2_tb > 0.0) {
        log::warn!("nonpositive long-run variance estimate {s2_tb:e}");
    }
    let value = tm1 * (alpha_hat - 1.0) - 0.5 * (s2_tb - s2_k) / (lagged_ss / (tm1 * tm1));
    Ok(ZalphaResult {
        value,
        alpha_hat,
        bandwidth,
        s2_k,
        s2_tb,
    })
}

pub fn zalpha_statistic(u_hat: &[f64], spec: KernelSpec) -> Result<f64> {
    Ok(zalpha(u_hat, spec)?.value)
}

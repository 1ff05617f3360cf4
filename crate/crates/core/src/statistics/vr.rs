use crate::error::{Error, Result};

/// `T^-2 Σ_t (Σ_{s<=t} û_s)^2 / Σ_t û_t^2`.
pub fn vr_statistic(u_hat: &[f64]) -> Result<f64> {
    let t = u_hat.len();
    if t < 2 {
        return Err(Error::SampleTooSmall(format!("VR needs T >= 2, got {t}")));
    }
    let denom: f64 = u_hat.iter().map(|u| u * u).sum();
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::DegenerateResiduals);
    }
    let mut acc = 0.0;
    let mut num = 0.0;
    for u in u_hat {
        acc += u;
        num += acc * acc;
    }
    Ok(num / (t as f64 * t as f64) / denom)
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::limits::{limit_functionals, with_resampling};
use super::paths::build_paths;
use crate::detrend::{DeterministicCase, DetrendMode};
use crate::error::{Error, Result};
use crate::numeric::empirical_quantile;
use crate::parallel::par_map;

/// Grid step of the `c̄` search.
pub const CBAR_STEP: f64 = 0.25;
/// Lower end of the search interval.
pub const CBAR_LOWER: f64 = -100.0;
const CALIBRATION_R2: f64 = 0.4;
const CALIBRATION_LEVEL: f64 = 0.05;
const TARGET_POWER: f64 = 0.5;

/// Published GLS detrending constants for the VR test, `m = 1..5`.
const CBAR_D1: [f64; 5] = [-40.25, -46.25, -53.75, -55.75, -60.00];
const CBAR_D2: [f64; 5] = [-48.25, -55.25, -56.50, -65.00, -68.75];

/// Tabulated `c̄` for the GLS variance ratio test.
pub fn table_cbar(case: DeterministicCase, m: usize) -> Option<f64> {
    let row = match case {
        DeterministicCase::D0 => return None,
        DeterministicCase::D1 => &CBAR_D1,
        DeterministicCase::D2 => &CBAR_D2,
    };
    m.checked_sub(1).and_then(|i| row.get(i).copied())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CbarCalibration {
    pub c_bar: f64,
    /// Local power at `c = c̄` of the level-5% test using `c̄`.
    pub power: f64,
    /// Every `(c̄, power)` pair evaluated during the search.
    pub evaluations: Vec<(f64, f64)>,
}

/// Power of the 5% GLS VR test at `c = c̄`, `R² = 0.4`, with the null
/// quantile simulated from the same innovations.
fn power_at(case: DeterministicCase, m: usize, c_bar: f64, replications: usize, grid_n: usize, seed: u64, workers: usize) -> Result<f64> {
    let mode = DetrendMode::Gls { c_bar };
    let pairs = par_map(workers, replications, |rep| {
        with_resampling(seed, rep as u64, grid_n, m, |innov| {
            let null = limit_functionals(&build_paths(innov, m, 0.0, 0.0), case, mode, 0.0, 0.0)?.vr;
            let alt = limit_functionals(&build_paths(innov, m, c_bar, CALIBRATION_R2), case, mode, c_bar, CALIBRATION_R2)?.vr;
            Ok((null, alt))
        })
    })?;
    let mut null = Vec::with_capacity(replications);
    let mut alt = Vec::with_capacity(replications);
    for p in pairs {
        let ((n, a), _) = p?;
        null.push(n);
        alt.push(a);
    }
    let q = empirical_quantile(&null, CALIBRATION_LEVEL)?;
    Ok(alt.iter().filter(|&&a| a <= q).count() as f64 / replications as f64)
}

/// Finds `c̄` on the grid `0, −0.25, …, −100` whose own-test local power at
/// `c = c̄` and `R² = 0.4` is closest to one half. Candidates share random
/// numbers, and the search bisects on the grid index.
pub fn calibrate_cbar(case: DeterministicCase, m: usize, replications: usize, grid_n: usize, seed: u64, workers: usize) -> Result<CbarCalibration> {
    if case == DeterministicCase::D0 {
        return Err(Error::InvalidCase("c_bar calibration needs D1 or D2".into()));
    }
    if m == 0 || replications < 100 || grid_n < 100 {
        return Err(Error::InvalidConfig("calibration needs m >= 1, at least 100 replications and grid_n >= 100".into()));
    }
    let top = (-CBAR_LOWER / CBAR_STEP).round() as i64;
    let mut cache: BTreeMap<i64, f64> = BTreeMap::new();
    let mut power = |k: i64| -> Result<f64> {
        if let Some(&p) = cache.get(&k) {
            return Ok(p);
        }
        let p = power_at(case, m, -CBAR_STEP * k as f64, replications, grid_n, seed, workers)?;
        log::debug!("c_bar = {:.2}: power {p:.4}", -CBAR_STEP * k as f64);
        cache.insert(k, p);
        Ok(p)
    };
    let p_top = power(top)?;
    if p_top < TARGET_POWER {
        return Err(Error::NoSolutionInRange { lower: CBAR_LOWER, power_at_lower: p_top });
    }
    let (mut lo, mut hi) = (0_i64, top);
    let chosen = if power(lo)? >= TARGET_POWER {
        lo
    } else {
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if power(mid)? >= TARGET_POWER {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let (pl, ph) = (power(lo)?, power(hi)?);
        if (pl - TARGET_POWER).abs() < (ph - TARGET_POWER).abs() { lo } else { hi }
    };
    let c_bar = -CBAR_STEP * chosen as f64;
    let result_power = power(chosen)?;
    Ok(CbarCalibration {
        c_bar,
        power: result_power,
        evaluations: cache.iter().map(|(&k, &p)| (-CBAR_STEP * k as f64, p)).collect(),
    })
}

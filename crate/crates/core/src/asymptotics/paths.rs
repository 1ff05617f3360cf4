use serde::{Deserialize, Serialize};

use crate::detrend::{DeterministicCase, DetrendMode};
use crate::error::{Error, Result};
use crate::numeric::RngStream;
use crate::statistics::TestKind;

/// Full description of one limiting-distribution functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitSpec {
    pub test: TestKind,
    pub case: DeterministicCase,
    pub detrend: DetrendMode,
    pub m: usize,
    pub c: f64,
    pub r_squared: f64,
    pub grid_n: usize,
    pub replications: usize,
    pub seed: u64,
}

impl LimitSpec {
    /// Null specification (`c = 0`, `R² = 0`).
    pub fn null(test: TestKind, case: DeterministicCase, detrend: DetrendMode, m: usize, grid_n: usize, replications: usize, seed: u64) -> Self {
        Self { test, case, detrend, m, c: 0.0, r_squared: 0.0, grid_n, replications, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidConfig("m must be at least 1".into()));
        }
        if !(self.c <= 0.0) {
            return Err(Error::InvalidConfig(format!("c must be nonpositive, got {}", self.c)));
        }
        if !(0.0..1.0).contains(&self.r_squared) {
            return Err(Error::InvalidConfig(format!("R² must lie in [0, 1), got {}", self.r_squared)));
        }
        if self.grid_n < 100 {
            return Err(Error::InvalidConfig(format!("grid_n must be at least 100, got {}", self.grid_n)));
        }
        if self.test == TestKind::Zalpha && self.detrend.is_gls() {
            return Err(Error::InvalidConfig("the Zalpha limit is only defined under OLS detrending".into()));
        }
        self.detrend.validate(self.case)
    }
}

/// Standard normal increments scaled by `n^{-1/2}`: first the `W_{ξ·v}`
/// block, then one block per regressor, so a draw for `m` regressors is a
/// prefix of the draw for any larger `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Innovations {
    pub perp: Vec<f64>,
    pub v: Vec<Vec<f64>>,
}

impl Innovations {
    pub fn draw(n: usize, m: usize, rng: &mut RngStream) -> Self {
        let scale = 1.0 / (n as f64).sqrt();
        let mut block = || {
            let mut e = vec![0.0; n];
            rng.fill_standard_normal(&mut e);
            e.iter_mut().for_each(|x| *x *= scale);
            e
        };
        let perp = block();
        let v = (0..m).map(|_| block()).collect();
        Self { perp, v }
    }

    pub fn n(&self) -> usize {
        self.perp.len()
    }
}

/// Discretized `W_{ξ·v}`, `W_v` and the Ornstein-Uhlenbeck path `J^c` on the grid `r_i = i/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    pub w_perp: Vec<f64>,
    pub w_v: Vec<Vec<f64>>,
    pub j_c: Vec<f64>,
    /// Increments of `W_{ξ·v} + sqrt(R²/(1-R²)) W̄_v`.
    pub driver_increments: Vec<f64>,
    pub w_v_increments: Vec<Vec<f64>>,
}

fn cumulate(d: &[f64]) -> Vec<f64> {
    crate::numeric::partial_sums(d)
}

/// Paths for the first `m` regressor blocks of `innov`.
pub fn build_paths(innov: &Innovations, m: usize, c: f64, r_squared: f64) -> PathBundle {
    let n = innov.n();
    let loading = if r_squared > 0.0 {
        (r_squared / (1.0 - r_squared)).sqrt() / (m as f64).sqrt()
    } else {
        0.0
    };
    let dv = &innov.v[..m];
    let driver: Vec<f64> = (0..n)
        .map(|i| {
            if loading == 0.0 {
                innov.perp[i]
            } else {
                innov.perp[i] + loading * dv.iter().map(|col| col[i]).sum::<f64>()
            }
        })
        .collect();
    let decay = (c / n as f64).exp();
    let mut j = 0.0;
    let j_c = driver
        .iter()
        .map(|d| {
            j = decay * j + d;
            j
        })
        .collect();
    PathBundle {
        w_perp: cumulate(&innov.perp),
        w_v: dv.iter().map(|col| cumulate(col)).collect(),
        j_c,
        driver_increments: driver,
        w_v_increments: dv.to_vec(),
    }
}

pub fn simulate_paths(spec: &LimitSpec, rng: &mut RngStream) -> PathBundle {
    let innov = Innovations::draw(spec.grid_n, spec.m, rng);
    build_paths(&innov, spec.m, spec.c, spec.r_squared)
}

/// Riemann approximations of `∫P` and `∫sP` on `r_i = i/n`.
fn moments(path: &[f64]) -> (f64, f64) {
    let n = path.len() as f64;
    let (a, b) = path
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(a, b), (i, p)| (a + p, b + (i + 1) as f64 * p));
    (a / n, b / (n * n))
}

/// Continuous-time OLS detrending of a path; also returns the detrended value at `r = 0`
/// (the path itself starts at zero).
pub(crate) fn detrend_path_with_origin(path: &[f64], case: DeterministicCase) -> (Vec<f64>, f64) {
    let n = path.len() as f64;
    match case {
        DeterministicCase::D0 => (path.to_vec(), 0.0),
        DeterministicCase::D1 => {
            let (mean, _) = moments(path);
            (path.iter().map(|p| p - mean).collect(), -mean)
        }
        DeterministicCase::D2 => {
            let (int_p, int_sp) = moments(path);
            let out = path
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let r = (i + 1) as f64 / n;
                    p - (4.0 - 6.0 * r) * int_p - (12.0 * r - 6.0) * int_sp
                })
                .collect();
            (out, -4.0 * int_p + 6.0 * int_sp)
        }
    }
}

/// `P̃(r) = P(r) − ∫P` (D1) or `P(r) − (4−6r)∫P − (12r−6)∫sP` (D2), Riemann integrals.
pub fn detrend_path(path: &[f64], case: DeterministicCase) -> Vec<f64> {
    detrend_path_with_origin(path, case).0
}

/// Limit of GLS detrending: identity in D1, `P(r) − (λP(1) + 3(1−λ)∫sP) r` in D2.
pub fn gls_path(path: &[f64], case: DeterministicCase, c_bar: f64) -> Vec<f64> {
    match case {
        DeterministicCase::D0 | DeterministicCase::D1 => path.to_vec(),
        DeterministicCase::D2 => {
            let n = path.len() as f64;
            let lambda = (1.0 - c_bar) / (1.0 - c_bar + c_bar * c_bar / 3.0);
            let (_, int_sp) = moments(path);
            let slope = lambda * path[path.len() - 1] + 3.0 * (1.0 - lambda) * int_sp;
            path.iter()
                .enumerate()
                .map(|(i, p)| p - slope * (i + 1) as f64 / n)
                .collect()
        }
    }
}

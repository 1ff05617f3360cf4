//! Finite-sample Monte Carlo studies: empirical size at asymptotic critical
//! values, size-corrected power along `ρ_T = 1 + c/T`, and power under large
//! initial values.
//!
//! Every cell uses the same `(seed, replication)` streams, so cells that only
//! differ in `c` or `λ_u` see common random numbers.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::asymptotics::CriticalValues;
use crate::detrend::{DeterministicCase, DetrendMode};
use crate::dgp::{generate_sample, DgpConfig, ShortRunDynamics, U0Rule};
use crate::error::{Error, Result};
use crate::numeric::{empirical_quantile, RngStream};
use crate::parallel::par_map;
use crate::residuals::{cointegrating_residuals, ResidualSeries};
use crate::statistics::{statistic_from_residuals, TestKind, TestOptions};

/// One test variant of a study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestSpec {
    pub kind: TestKind,
    pub detrend: DetrendMode,
    pub options: TestOptions,
}

impl TestSpec {
    pub fn new(kind: TestKind, detrend: DetrendMode) -> Self {
        Self { kind, detrend, options: TestOptions::default() }
    }

    pub fn with_options(mut self, options: TestOptions) -> Self {
        self.options = options;
        self
    }

    /// Criterion column of the results file; empty for tests without lags.
    pub fn criterion_label(&self) -> String {
        if self.kind.uses_lags() && self.options.lag.is_none() {
            self.options.criterion.to_string()
        } else {
            String::new()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub case: DeterministicCase,
    pub dynamics: Vec<ShortRunDynamics>,
    pub r_squared: Vec<f64>,
    pub t_grid: Vec<usize>,
    pub tests: Vec<TestSpec>,
    pub replications: usize,
    pub level: f64,
    /// Nonpositive local alternatives; power studies require `0` in the grid.
    pub c_grid: Vec<f64>,
    pub seed: u64,
    pub burn_in: usize,
}

impl ExperimentPlan {
    /// 21 equidistant points on `[-60, 0]`, descending from `0`.
    pub fn default_c_grid() -> Vec<f64> {
        (0..=20).map(|i| -3.0 * i as f64).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 100 {
            return Err(Error::InvalidConfig(format!("at least 100 replications required, got {}", self.replications)));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidConfig(format!("level {} outside (0, 1)", self.level)));
        }
        if self.tests.is_empty() || self.dynamics.is_empty() || self.r_squared.is_empty() || self.t_grid.is_empty() {
            return Err(Error::InvalidConfig("plan has an empty grid".into()));
        }
        if self.c_grid.iter().any(|c| !(*c <= 0.0)) {
            return Err(Error::InvalidConfig("c grid must be nonpositive".into()));
        }
        for d in &self.dynamics {
            d.validate()?;
        }
        for r2 in &self.r_squared {
            if !(0.0..1.0).contains(r2) {
                return Err(Error::InvalidConfig(format!("R² must lie in [0, 1), got {r2}")));
            }
        }
        for spec in &self.tests {
            spec.detrend.validate(self.case)?;
            if spec.kind == TestKind::Zalpha && spec.detrend.is_gls() {
                return Err(Error::InvalidConfig("Zalpha is only defined for OLS detrending".into()));
            }
        }
        Ok(())
    }

    /// SHA-256 of the serialized plan, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("plan serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    fn cells(&self) -> impl Iterator<Item = (usize, ShortRunDynamics, f64)> + '_ {
        self.t_grid.iter().flat_map(move |&t| {
            self.dynamics
                .iter()
                .flat_map(move |&d| self.r_squared.iter().map(move |&r2| (t, d, r2)))
        })
    }
}

/// One cell of a results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub test: TestKind,
    pub case: DeterministicCase,
    pub detrend: DetrendMode,
    pub criterion: String,
    pub dynamics: ShortRunDynamics,
    pub r2: f64,
    pub t: usize,
    pub c: f64,
    pub lambda_u: f64,
    pub value: f64,
    pub replications: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionTable {
    pub plan_hash: String,
    pub rows: Vec<ResultRow>,
}

pub const RESULTS_HEADER: &str = "experiment,test,case,detrend,criterion,dynamics,r2,T,c,lambda_u,value,replications,seed,plan";

impl RejectionTable {
    /// Long-format results, one row per cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(RESULTS_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.experiment,
                r.test,
                r.case,
                r.detrend,
                r.criterion,
                r.dynamics,
                r.r2,
                r.t,
                r.c,
                r.lambda_u,
                r.value,
                r.replications,
                r.seed,
                self.plan_hash
            );
        }
        out
    }
}

/// Statistics of every test for one generated sample. Numerical failures
/// become `NaN`, which never rejects.
fn sample_statistics(y: &[f64], x: &crate::numeric::SeriesMatrix, case: DeterministicCase, tests: &[TestSpec]) -> Result<Vec<f64>> {
    let mut cache: Vec<(DetrendMode, std::result::Result<ResidualSeries, Error>)> = Vec::new();
    let mut residuals_for = |mode: DetrendMode| -> usize {
        if let Some(i) = cache.iter().position(|(m, _)| *m == mode) {
            return i;
        }
        cache.push((mode, cointegrating_residuals(y, x, case, mode)));
        cache.len() - 1
    };
    let mut wanted = Vec::with_capacity(tests.len());
    for spec in tests {
        let main = residuals_for(spec.detrend);
        let needs_ols = spec.detrend.is_gls() && spec.kind.uses_lags() && spec.options.lag.is_none() && spec.options.criterion.is_modified();
        let ols = needs_ols.then(|| residuals_for(DetrendMode::Ols));
        wanted.push((main, ols));
    }
    tests
        .iter()
        .zip(wanted)
        .map(|(spec, (main, ols))| {
            let outcome = match (&cache[main].1, ols.map(|i| &cache[i].1)) {
                (Err(e), _) | (_, Some(Err(e))) => Err(e.clone()),
                (Ok(r), ols) => statistic_from_residuals(r, ols.and_then(|o| o.as_ref().ok()), spec.kind, &spec.options)
                    .map(|s| s.value),
            };
            match outcome {
                Ok(v) => Ok(v),
                Err(e) if e.is_numerical() => Ok(f64::NAN),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Draws `[test][replication]` for one DGP configuration.
fn simulate(plan: &ExperimentPlan, config: &DgpConfig, workers: usize) -> Result<Vec<Vec<f64>>> {
    let per_rep = par_map(workers, plan.replications, |rep| {
        let mut rng = RngStream::new(plan.seed, rep as u64);
        let sample = generate_sample(config, &mut rng)?;
        sample_statistics(&sample.y, &sample.x, plan.case, &plan.tests)
    })?;
    let mut out = vec![Vec::with_capacity(plan.replications); plan.tests.len()];
    for row in per_rep {
        for (col, v) in out.iter_mut().zip(row?) {
            col.push(v);
        }
    }
    let failed: usize = out.iter().map(|c| c.iter().filter(|v| v.is_nan()).count()).sum();
    if failed > 0 {
        log::warn!("{failed} statistics failed numerically and count as non-rejections ({config:?})");
    }
    Ok(out)
}

fn rejection_rate(draws: &[f64], critical: f64) -> f64 {
    draws.iter().filter(|&&v| v <= critical).count() as f64 / draws.len() as f64
}

/// Lower empirical quantile with failed draws sorted last.
fn empirical_critical(draws: &[f64], level: f64) -> Result<f64> {
    let cleaned: Vec<f64> = draws.iter().map(|v| if v.is_nan() { f64::INFINITY } else { *v }).collect();
    empirical_quantile(&cleaned, level)
}

fn base_config(plan: &ExperimentPlan, t: usize, dynamics: ShortRunDynamics, r2: f64) -> DgpConfig {
    DgpConfig { burn_in: plan.burn_in, ..DgpConfig::null(t, plan.case, dynamics, r2) }
}

fn row(plan: &ExperimentPlan, experiment: &str, spec: &TestSpec, cell: (usize, ShortRunDynamics, f64), c: f64, lambda_u: f64, value: f64) -> ResultRow {
    ResultRow {
        experiment: experiment.to_string(),
        test: spec.kind,
        case: plan.case,
        detrend: spec.detrend,
        criterion: spec.criterion_label(),
        dynamics: cell.1,
        r2: cell.2,
        t: cell.0,
        c,
        lambda_u,
        value,
        replications: plan.replications,
        seed: plan.seed,
    }
}

/// Rejection frequencies under the null at asymptotic critical values with `m = 1`.
pub fn empirical_size(plan: &ExperimentPlan, critvals: &CriticalValues, workers: usize) -> Result<RejectionTable> {
    plan.validate()?;
    let critical: Vec<f64> = plan
        .tests
        .iter()
        .map(|s| critvals.lookup(s.kind, plan.case, s.detrend, 1, plan.level))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for cell in plan.cells() {
        let draws = simulate(plan, &base_config(plan, cell.0, cell.1, cell.2), workers)?;
        for ((spec, cv), d) in plan.tests.iter().zip(&critical).zip(&draws) {
            rows.push(row(plan, "size", spec, cell, 0.0, 0.0, rejection_rate(d, *cv)));
        }
    }
    Ok(RejectionTable { plan_hash: plan.hash(), rows })
}

/// Power along `plan.c_grid` at the empirical null critical value of each cell.
pub fn size_corrected_power(plan: &ExperimentPlan, workers: usize) -> Result<RejectionTable> {
    plan.validate()?;
    if !plan.c_grid.contains(&0.0) {
        return Err(Error::InvalidConfig("power studies need c = 0 in the grid".into()));
    }
    let mut rows = Vec::new();
    for cell in plan.cells() {
        let null_cfg = base_config(plan, cell.0, cell.1, cell.2);
        let null = simulate(plan, &null_cfg, workers)?;
        let critical: Vec<f64> = null.iter().map(|d| empirical_critical(d, plan.level)).collect::<Result<_>>()?;
        for &c in &plan.c_grid {
            let draws = if c == 0.0 { null.clone() } else { simulate(plan, &null_cfg.with_local(c), workers)? };
            for ((spec, cv), d) in plan.tests.iter().zip(&critical).zip(&draws) {
                rows.push(row(plan, "power", spec, cell, c, 0.0, rejection_rate(d, *cv)));
            }
        }
    }
    Ok(RejectionTable { plan_hash: plan.hash(), rows })
}

/// Size-corrected power at each nonzero `c` of the plan over a grid of
/// `λ_u`, reusing the null critical values of [`size_corrected_power`].
/// `λ_u = 0` keeps the burned-in initial value and so reproduces the
/// baseline power point.
pub fn large_u0_power(plan: &ExperimentPlan, lambda_grid: &[f64], random: bool, workers: usize) -> Result<RejectionTable> {
    plan.validate()?;
    let cs: Vec<f64> = plan.c_grid.iter().copied().filter(|c| *c < 0.0).collect();
    if cs.is_empty() {
        return Err(Error::InvalidConfig("large initial values need c < 0".into()));
    }
    if lambda_grid.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidConfig("lambda grid must be finite".into()));
    }
    let mut rows = Vec::new();
    for cell in plan.cells() {
        let null_cfg = base_config(plan, cell.0, cell.1, cell.2);
        let null = simulate(plan, &null_cfg, workers)?;
        let critical: Vec<f64> = null.iter().map(|d| empirical_critical(d, plan.level)).collect::<Result<_>>()?;
        for &c in &cs {
            for &lambda in lambda_grid {
                let u0_rule = match (lambda == 0.0, random) {
                    (true, _) => U0Rule::Zero,
                    (false, false) => U0Rule::LargeFixed(lambda),
                    (false, true) => U0Rule::LargeRandom(lambda),
                };
                let cfg = DgpConfig { u0_rule, ..null_cfg.with_local(c) };
                let draws = simulate(plan, &cfg, workers)?;
                for ((spec, cv), d) in plan.tests.iter().zip(&critical).zip(&draws) {
                    rows.push(row(plan, "u0", spec, cell, c, lambda, rejection_rate(d, *cv)));
                }
            }
        }
    }
    Ok(RejectionTable { plan_hash: plan.hash(), rows })
}

/// Finite-sample null draws of each test at one design point, in
/// `[test][replication]` layout.
pub fn null_draws(plan: &ExperimentPlan, t: usize, dynamics: ShortRunDynamics, r_squared: f64, workers: usize) -> Result<Vec<Vec<f64>>> {
    plan.validate()?;
    simulate(plan, &base_config(plan, t, dynamics, r_squared), workers)
}

/// Draws under a fixed autoregressive parameter `rho` of the errors.
pub fn draws_at_rho(plan: &ExperimentPlan, t: usize, dynamics: ShortRunDynamics, r_squared: f64, rho: f64, workers: usize) -> Result<Vec<Vec<f64>>> {
    plan.validate()?;
    simulate(plan, &DgpConfig { rho, ..base_config(plan, t, dynamics, r_squared) }, workers)
}

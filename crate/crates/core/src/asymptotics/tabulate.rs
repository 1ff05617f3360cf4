use serde::{Deserialize, Serialize};

use super::limits::{limit_functionals, with_resampling};
use super::paths::build_paths;
use super::table::{CriticalValues, QuantileTable, TableKey};
use crate::detrend::{DeterministicCase, DetrendMode};
use crate::error::{Error, Result};
use crate::numeric::quantile_of_sorted;
use crate::parallel::par_map;
use crate::statistics::TestKind;

/// Conventional tabulation levels.
pub const DEFAULT_LEVELS: [f64; 6] = [0.01, 0.025, 0.05, 0.075, 0.1, 0.15];

/// A batch of null tabulations sharing simulated paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulationRequest {
    pub keys: Vec<TableKey>,
    pub m_list: Vec<usize>,
    pub levels: Vec<f64>,
    pub replications: usize,
    pub grid_n: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tabulation {
    pub tables: CriticalValues,
    /// Replications redrawn because the regressor moment matrix was singular.
    pub resamples: u64,
}

impl TabulationRequest {
    fn validate(&self) -> Result<()> {
        if self.replications < 1000 {
            return Err(Error::InvalidConfig(format!("tabulation needs at least 1000 replications, got {}", self.replications)));
        }
        if self.grid_n < 100 {
            return Err(Error::InvalidConfig(format!("grid_n must be at least 100, got {}", self.grid_n)));
        }
        if self.keys.is_empty() || self.m_list.is_empty() || self.levels.is_empty() {
            return Err(Error::InvalidConfig("nothing to tabulate".into()));
        }
        if self.m_list.contains(&0) {
            return Err(Error::InvalidConfig("m must be at least 1".into()));
        }
        if let Some(l) = self.levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
            return Err(Error::InvalidConfig(format!("level {l} outside (0, 1)")));
        }
        for key in &self.keys {
            if key.test == TestKind::Zalpha && key.detrend.is_gls() {
                return Err(Error::InvalidConfig("the Zalpha limit is only defined under OLS detrending".into()));
            }
            key.detrend.validate(key.case)?;
        }
        Ok(())
    }
}

/// Tabulates null quantiles for every key and `m`. Each replication draws
/// one set of innovations (for the largest `m`) and evaluates all keys on it.
pub fn tabulate(request: &TabulationRequest, workers: usize) -> Result<Tabulation> {
    request.validate()?;
    let m_max = *request.m_list.iter().max().expect("validated non-empty");
    // Distinct detrending transforms, each evaluated once per path set.
    let mut transforms: Vec<(DeterministicCase, DetrendMode)> = Vec::new();
    for k in &request.keys {
        if !transforms.iter().any(|t| *t == (k.case, k.detrend)) {
            transforms.push((k.case, k.detrend));
        }
    }
    let per_rep = par_map(workers, request.replications, |rep| {
        with_resampling(request.seed, rep as u64, request.grid_n, m_max, |innov| {
            let mut row = Vec::with_capacity(request.m_list.len() * request.keys.len());
            for &m in &request.m_list {
                let bundle = build_paths(innov, m, 0.0, 0.0);
                let draws = transforms
                    .iter()
                    .map(|&(case, mode)| limit_functionals(&bundle, case, mode, 0.0, 0.0))
                    .collect::<Result<Vec<_>>>()?;
                for k in &request.keys {
                    let idx = transforms.iter().position(|t| *t == (k.case, k.detrend)).expect("registered");
                    row.push(draws[idx].get(k.test)?);
                }
            }
            Ok(row)
        })
    })?;

    let mut columns = vec![Vec::with_capacity(request.replications); request.m_list.len() * request.keys.len()];
    let mut resamples = 0;
    for r in per_rep {
        let (row, attempts) = r?;
        resamples += attempts;
        for (col, v) in columns.iter_mut().zip(row) {
            col.push(v);
        }
    }
    if resamples > 0 {
        log::info!("{resamples} replications redrawn after singular regressor moments");
    }

    let mut tables = CriticalValues::default();
    let mut idx = 0;
    for &m in &request.m_list {
        for key in &request.keys {
            let col = &mut columns[idx];
            idx += 1;
            col.sort_by(f64::total_cmp);
            let values = request
                .levels
                .iter()
                .map(|&l| quantile_of_sorted(col, l))
                .collect::<Result<Vec<_>>>()?;
            tables.push(QuantileTable {
                key: *key,
                m,
                levels: request.levels.clone(),
                values,
                replications: request.replications,
                grid_n: request.grid_n,
                seed: request.seed,
            });
        }
    }
    // Stable order: by key as requested, then m.
    let order = |t: &QuantileTable| {
        (request.keys.iter().position(|k| *k == t.key).unwrap_or(usize::MAX), t.m)
    };
    tables.tables.sort_by_key(order);
    Ok(Tabulation { tables, resamples })
}

/// Null quantiles of one test for each `m` in `m_list`.
#[allow(clippy::too_many_arguments)]
pub fn tabulate_critical_values(
    test: TestKind,
    case: DeterministicCase,
    detrend: DetrendMode,
    m_list: &[usize],
    levels: &[f64],
    replications: usize,
    grid_n: usize,
    seed: u64,
) -> Result<Vec<QuantileTable>> {
    let request = TabulationRequest {
        keys: vec![TableKey { test, case, detrend }],
        m_list: m_list.to_vec(),
        levels: levels.to_vec(),
        replications,
        grid_n,
        seed,
    };
    Ok(tabulate(&request, 0)?.tables.tables)
}

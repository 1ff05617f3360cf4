//! CSV ingestion for `vrcoint test`.

use std::path::{Path, PathBuf};

use serde::Serialize;
use vrcoint::detrend::deterministic_regressors;
use vrcoint::numeric::numerical_rank;
use vrcoint::{DeterministicCase, SeriesMatrix};

use crate::error::{CliError, CliResult};

/// Where the analysed sample came from.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub file: PathBuf,
    pub lhs: String,
    pub rhs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label_column: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_label: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub last_label: Option<String>,
    pub log: bool,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub y: Vec<f64>,
    pub x: SeriesMatrix,
    pub provenance: Provenance,
}

pub struct LoadOptions<'a> {
    pub lhs: &'a str,
    pub rhs: &'a [String],
    pub last: Option<usize>,
    pub log: bool,
}

fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn load(path: &Path, opts: &LoadOptions<'_>) -> CliResult<Dataset> {
    if !path.exists() {
        return Err(CliError::FileNotFound(path.to_path_buf()));
    }
    if opts.rhs.is_empty() {
        return Err(CliError::Usage("at least one --rhs column is required".into()));
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let records: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>()?;
    let index = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::ColumnNotFound(name.to_string()))
    };
    let lhs_idx = index(opts.lhs)?;
    let rhs_idx: Vec<usize> = opts.rhs.iter().map(|c| index(c)).collect::<CliResult<_>>()?;

    let start = match opts.last {
        Some(0) => return Err(CliError::Usage("--last must be positive".into())),
        Some(n) if n > records.len() => {
            return Err(vrcoint::Error::SampleTooSmall(format!("--last {n} exceeds the {} data rows", records.len())).into())
        }
        Some(n) => records.len() - n,
        None => 0,
    };
    let window = &records[start..];
    if window.is_empty() {
        return Err(vrcoint::Error::EmptyInput.into());
    }

    let column = |idx: usize| -> CliResult<Vec<f64>> {
        window
            .iter()
            .enumerate()
            .map(|(i, rec)| {
                let raw = rec.get(idx).unwrap_or("");
                let row = start + i + 2;
                let v = parse_number(raw).ok_or_else(|| CliError::NonNumericData {
                    column: header[idx].clone(),
                    row,
                    value: raw.to_string(),
                })?;
                if !opts.log {
                    return Ok(v);
                }
                if v <= 0.0 {
                    return Err(CliError::NonPositiveLog { column: header[idx].clone(), row, value: v });
                }
                Ok(v.ln())
            })
            .collect()
    };
    let y = column(lhs_idx)?;
    let x_cols: Vec<Vec<f64>> = rhs_idx.iter().map(|&i| column(i)).collect::<CliResult<_>>()?;

    // A first column that is not entirely numeric is a date or label column.
    let label_idx = (!records.is_empty() && records.iter().any(|r| parse_number(r.get(0).unwrap_or("")).is_none()))
        .then_some(0)
        .filter(|i| *i != lhs_idx && !rhs_idx.contains(i));
    let label = |rec: &csv::StringRecord| label_idx.and_then(|i| rec.get(i)).map(str::to_string);

    Ok(Dataset {
        y,
        x: SeriesMatrix::from_columns(&x_cols)?,
        provenance: Provenance {
            file: path.to_path_buf(),
            lhs: opts.lhs.to_string(),
            rhs: opts.rhs.to_vec(),
            label_column: label_idx.map(|i| header[i].clone()),
            first_label: window.first().and_then(label),
            last_label: window.last().and_then(label),
            log: opts.log,
        },
    })
}

/// Names the first of `[lhs, rhs...]` that adds no rank to the
/// deterministic terms and the columns before it.
pub fn check_collinearity(data: &Dataset, case: DeterministicCase) -> CliResult<()> {
    let t = data.y.len();
    let mut design = deterministic_regressors(case, t);
    let names = std::iter::once(&data.provenance.lhs).chain(&data.provenance.rhs);
    let cols = std::iter::once(data.y.as_slice()).chain(data.x.columns());
    for (name, col) in names.zip(cols) {
        let next = design.hstack(&SeriesMatrix::from_column(col.to_vec())?)?;
        let rank = numerical_rank(next.as_matrix());
        if rank < next.ncols() {
            return Err(CliError::Collinear {
                column: name.clone(),
                detail: vrcoint::Error::RankDeficient { rank, columns: next.ncols() },
            });
        }
        design = next;
    }
    Ok(())
}

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::detrend::{DeterministicCase, DetrendMode};
use crate::error::{Error, Result};
use crate::statistics::TestKind;

const HEADER: &str = "test,case,detrend,m,level,value,replications,grid_n,seed";

static BUNDLED: &str = include_str!("../../assets/critical_values.csv");

/// Which limiting distribution a table describes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableKey {
    pub test: TestKind,
    pub case: DeterministicCase,
    pub detrend: DetrendMode,
}

impl TableKey {
    /// GLS detrending in D1 has a `c̄`-free limit, so any `c̄` matches.
    fn matches(&self, test: TestKind, case: DeterministicCase, detrend: DetrendMode) -> bool {
        if self.test != test || self.case != case {
            return false;
        }
        match (self.detrend, detrend) {
            (DetrendMode::Ols, DetrendMode::Ols) => true,
            (DetrendMode::Gls { .. }, DetrendMode::Gls { .. }) if case == DeterministicCase::D1 => true,
            (DetrendMode::Gls { c_bar: a }, DetrendMode::Gls { c_bar: b }) => (a - b).abs() < 1e-9,
            _ => false,
        }
    }
}

/// Quantiles of one null distribution with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileTable {
    pub key: TableKey,
    pub m: usize,
    pub levels: Vec<f64>,
    pub values: Vec<f64>,
    pub replications: usize,
    pub grid_n: usize,
    pub seed: u64,
}

impl QuantileTable {
    pub fn value_at(&self, level: f64) -> Option<f64> {
        self.levels
            .iter()
            .position(|l| (l - level).abs() < 1e-12)
            .map(|i| self.values[i])
    }
}

/// Formats with five significant digits in plain decimal notation.
pub fn format_sig5(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exponent = v.abs().log10().floor() as i32;
    let decimals = (4 - exponent).max(0) as usize;
    let s = format!("{v:.decimals$}");
    // Rounding can carry into a new leading digit (9.99996 -> 10.0000).
    let digits = s.chars().filter(|c| c.is_ascii_digit()).skip_while(|&c| c == '0').count();
    if digits > 5 && decimals > 0 {
        let d = decimals - 1;
        format!("{v:.d$}")
    } else {
        s
    }
}

/// A collection of quantile tables, serializable as a flat text table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CriticalValues {
    pub tables: Vec<QuantileTable>,
}

impl CriticalValues {
    /// Tables shipped with the library.
    pub fn bundled() -> Self {
        Self::from_csv(BUNDLED).expect("bundled critical value table is well formed")
    }

    pub fn push(&mut self, table: QuantileTable) {
        self.tables.push(table);
    }

    pub fn extend(&mut self, other: CriticalValues) {
        self.tables.extend(other.tables);
    }

    pub fn find(&self, test: TestKind, case: DeterministicCase, detrend: DetrendMode, m: usize) -> Option<&QuantileTable> {
        self.tables.iter().find(|t| t.m == m && t.key.matches(test, case, detrend))
    }

    pub fn lookup(&self, test: TestKind, case: DeterministicCase, detrend: DetrendMode, m: usize, level: f64) -> Result<f64> {
        self.find(test, case, detrend, m)
            .and_then(|t| t.value_at(level))
            .ok_or_else(|| Error::MissingCriticalValue(format!("{test} {case} {detrend} m={m} level={level}")))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(HEADER);
        out.push('\n');
        for t in &self.tables {
            for (level, value) in t.levels.iter().zip(&t.values) {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    t.key.test,
                    t.key.case,
                    t.key.detrend,
                    t.m,
                    level,
                    format_sig5(*value),
                    t.replications,
                    t.grid_n,
                    t.seed
                );
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == HEADER => {}
            Some((i, _)) => return Err(Error::TableFormat { line: i + 1, reason: format!("expected header '{HEADER}'") }),
            None => return Ok(Self::default()),
        }
        let mut out = Self::default();
        for (i, line) in lines {
            let bad = |reason: String| Error::TableFormat { line: i + 1, reason };
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 9 {
                return Err(bad(format!("expected 9 fields, found {}", f.len())));
            }
            let key = TableKey {
                test: f[0].parse().map_err(|e: Error| bad(e.to_string()))?,
                case: f[1].parse().map_err(|e: Error| bad(e.to_string()))?,
                detrend: f[2].parse().map_err(|e: Error| bad(e.to_string()))?,
            };
            let num = |s: &str, what: &str| s.parse::<f64>().map_err(|_| bad(format!("invalid {what} '{s}'")));
            let int = |s: &str, what: &str| s.parse::<u64>().map_err(|_| bad(format!("invalid {what} '{s}'")));
            let m = int(f[3], "m")? as usize;
            let level = num(f[4], "level")?;
            let value = num(f[5], "value")?;
            let (replications, grid_n, seed) = (int(f[6], "replications")? as usize, int(f[7], "grid_n")? as usize, int(f[8], "seed")?);
            let same = out.tables.last_mut().filter(|t| {
                t.key == key && t.m == m && t.replications == replications && t.grid_n == grid_n && t.seed == seed
            });
            match same {
                Some(t) => {
                    t.levels.push(level);
                    t.values.push(value);
                }
                None => out.tables.push(QuantileTable { key, m, levels: vec![level], values: vec![value], replications, grid_n, seed }),
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig5(0.00579), "0.0057900");
        assert_eq!(format_sig5(-3.33613), "-3.3361");
        assert_eq!(format_sig5(-20.49351), "-20.494");
        assert_eq!(format_sig5(0.143), "0.14300");
        assert_eq!(format_sig5(9.999996), "10.000");
        assert_eq!(format_sig5(123456.7), "123457");
    }

    fn sample() -> CriticalValues {
        let mk = |test, detrend, m, values: Vec<f64>| QuantileTable {
            key: TableKey { test, case: DeterministicCase::D1, detrend },
            m,
            levels: vec![0.01, 0.05],
            values,
            replications: 1000,
            grid_n: 500,
            seed: 42,
        };
        CriticalValues {
            tables: vec![
                mk(TestKind::Vr, DetrendMode::Ols, 1, vec![0.0034412, 0.0057931]),
                mk(TestKind::Vr, DetrendMode::Gls { c_bar: -40.25 }, 1, vec![0.0048, 0.0091]),
                mk(TestKind::Adf, DetrendMode::Ols, 2, vec![-4.3, -3.7]),
            ],
        }
    }

    #[test]
    fn csv_round_trip() {
        let text = sample().to_csv();
        let back = CriticalValues::from_csv(&text).unwrap();
        assert_eq!(back.tables.len(), 3);
        assert_eq!(back.to_csv(), text);
        assert_eq!(back.lookup(TestKind::Vr, DeterministicCase::D1, DetrendMode::Ols, 1, 0.05).unwrap(), 0.0057931);
    }

    #[test]
    fn gls_d1_lookup_ignores_cbar() {
        let cv = sample();
        assert_eq!(cv.lookup(TestKind::Vr, DeterministicCase::D1, DetrendMode::Gls { c_bar: -3.0 }, 1, 0.01).unwrap(), 0.0048);
        assert!(matches!(
            cv.lookup(TestKind::Msb, DeterministicCase::D1, DetrendMode::Ols, 1, 0.05),
            Err(Error::MissingCriticalValue(_))
        ));
    }

    #[test]
    fn malformed_rows_are_reported() {
        let text = format!("{HEADER}\nVR,D1,ols,1,0.05,abc,1000,500,42\n");
        assert!(matches!(CriticalValues::from_csv(&text), Err(Error::TableFormat { line: 2, .. })));
    }

    #[test]
    fn bundled_table_parses() {
        let _ = CriticalValues::bundled();
    }
}

use super::limits::{limit_functionals, with_resampling};
use super::paths::build_paths;
use crate::detrend::{DeterministicCase, DetrendMode};
use crate::error::{Error, Result};
use crate::numeric::empirical_quantile;
use crate::parallel::par_map;
use crate::statistics::TestKind;

/// Settings shared by every curve of a local power computation.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDesign {
    pub case: DeterministicCase,
    pub detrend: DetrendMode,
    pub m: usize,
    pub r_squared: f64,
    pub c_grid: Vec<f64>,
    pub level: f64,
    pub replications: usize,
    pub grid_n: usize,
    pub seed: u64,
}

/// Local asymptotic power curves for several tests on common draws.
/// Returns one curve per test, one entry per `c` in the grid. Rejection is
/// `draw <= q`, with `q` the lower `level` quantile of the `c = 0` draws, so
/// the curve equals the level exactly at `c = 0` when `level · N` is integral.
pub fn local_power_curves(tests: &[TestKind], design: &PowerDesign, workers: usize) -> Result<Vec<Vec<f64>>> {
    if !(design.level > 0.0 && design.level < 1.0) {
        return Err(Error::InvalidConfig(format!("level {} outside (0, 1)", design.level)));
    }
    if design.c_grid.iter().any(|c| !(*c <= 0.0)) {
        return Err(Error::InvalidConfig("c grid must be nonpositive".into()));
    }
    if !(0.0..1.0).contains(&design.r_squared) || design.m == 0 || design.grid_n < 100 || design.replications == 0 {
        return Err(Error::InvalidConfig("invalid power design".into()));
    }
    design.detrend.validate(design.case)?;
    if design.detrend.is_gls() && tests.contains(&TestKind::Zalpha) {
        return Err(Error::InvalidConfig("the Zalpha limit is only defined under OLS detrending".into()));
    }
    let mut cs = vec![0.0];
    cs.extend(design.c_grid.iter().copied());
    let per_rep = par_map(workers, design.replications, |rep| {
        with_resampling(design.seed, rep as u64, design.grid_n, design.m, |innov| {
            let mut row = Vec::with_capacity(cs.len() * tests.len());
            for &c in &cs {
                let b = build_paths(innov, design.m, c, design.r_squared);
                let d = limit_functionals(&b, design.case, design.detrend, c, design.r_squared)?;
                for &t in tests {
                    row.push(d.get(t)?);
                }
            }
            Ok(row)
        })
    })?;
    let rows: Vec<Vec<f64>> = per_rep.into_iter().map(|r| r.map(|(row, _)| row)).collect::<Result<_>>()?;
    let column = |ci: usize, ti: usize| -> Vec<f64> { rows.iter().map(|r| r[ci * tests.len() + ti]).collect() };
    let n = design.replications as f64;
    tests
        .iter()
        .enumerate()
        .map(|(ti, _)| {
            let q = empirical_quantile(&column(0, ti), design.level)?;
            Ok((1..cs.len())
                .map(|ci| column(ci, ti).iter().filter(|&&v| v <= q).count() as f64 / n)
                .collect())
        })
        .collect()
}

/// Local asymptotic power of one test over `design.c_grid`.
pub fn local_power_curve(test: TestKind, design: &PowerDesign, workers: usize) -> Result<Vec<f64>> {
    Ok(local_power_curves(&[test], design, workers)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design() -> PowerDesign {
        PowerDesign {
            case: DeterministicCase::D0,
            detrend: DetrendMode::Ols,
            m: 1,
            r_squared: 0.0,
            c_grid: vec![0.0, -5.0, -10.0, -15.0, -20.0, -25.0, -30.0],
            level: 0.05,
            replications: 1000,
            grid_n: 500,
            seed: 42,
        }
    }

    #[test]
    fn level_is_exact_at_zero_and_power_grows() {
        let curves = local_power_curves(&TestKind::ALL, &design(), 0).unwrap();
        for curve in &curves {
            assert_eq!(curve[0], 0.05);
        }
        let vr = &curves[0];
        let se = |p: f64| (p * (1.0 - p) / 1000.0).sqrt();
        for w in vr.windows(2) {
            assert!(w[1] >= w[0] - 2.0 * se(w[0]), "{vr:?}");
        }
    }
}

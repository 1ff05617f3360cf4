//! `vrcoint simulate`: finite-sample size and power studies and local
//! asymptotic power curves, written as long-format results plus a pivot.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use vrcoint::asymptotics::{local_power_curves, table_cbar, PowerDesign};
use vrcoint::dgp::ShortRunDynamics;
use vrcoint::experiments::{
    empirical_size, large_u0_power, size_corrected_power, ExperimentPlan, RejectionTable, TestSpec, RESULTS_HEADER,
};
use vrcoint::{Criterion, DeterministicCase, DetrendMode, TestKind, TestOptions};

use crate::error::{CliError, CliResult};
use crate::output::{pivot, write_atomic};
use crate::{load_critvals, parse_list, Detrend};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    /// Empirical size at asymptotic critical values.
    Size,
    /// Size-corrected power along rho = 1 + c/T.
    Power,
    /// Local asymptotic power from the limit distributions.
    Lap,
    /// Size-corrected power under large initial values.
    U0,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    experiment: Experiment,
    #[arg(long, default_value = "d1")]
    case: DeterministicCase,
    /// Short-run dynamics such as iid, ar(0.6), ma(0.9), arma(0.3;0.6),
    /// garch(0.05;0.94), comma separated, or all.
    #[arg(long, default_value = "iid")]
    dynamics: String,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    r2: Vec<f64>,
    #[arg(long = "t", value_delimiter = ',', default_value = "100")]
    t_grid: Vec<usize>,
    /// Test variants: vr, vr-gls, adf, adf*, adf-gls*, msb, msb-gls*, zalpha;
    /// `*` selects MAIC and `:bic`/`:mbic` other criteria. Defaults to every
    /// variant runnable with the available settings.
    #[arg(long, value_delimiter = ',')]
    tests: Vec<String>,
    #[arg(long, default_value_t = 2000)]
    reps: usize,
    #[arg(long, default_value_t = 0.05)]
    level: f64,
    /// Nonpositive c values; defaults to 21 points on [-60, 0] (power, lap) or -20 (u0).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    c_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,1.5,2,2.5,3,3.5,4,4.5,5")]
    lambda: Vec<f64>,
    /// Draw u0 from a normal distribution instead of fixing it.
    #[arg(long)]
    random_u0: bool,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    burn_in: usize,
    /// GLS constant for ADF and MSB variants.
    #[arg(long, allow_hyphen_values = true)]
    competitor_cbar: Option<f64>,
    /// Detrending for local asymptotic power curves.
    #[arg(long, value_enum, default_value_t = Detrend::Ols)]
    detrend: Detrend,
    /// GLS constant for local power curves; `auto` uses the tabulated VR value.
    #[arg(long, default_value = "auto", allow_hyphen_values = true)]
    cbar: String,
    /// Number of regressors for local power curves.
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Grid steps per simulated Brownian path (lap only).
    #[arg(long, default_value_t = 1000)]
    grid: usize,
    /// Study-scale design: 5000 replications, every dynamics, R² in {0, 0.4, 0.8}, T in {100, 250}.
    #[arg(long)]
    full_scale: bool,
    #[arg(long)]
    critvals: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Pivot file; defaults to the output path with a `.pivot.csv` suffix.
    #[arg(long)]
    pivot: Option<PathBuf>,
}

struct Variant {
    spec: TestSpec,
    label: String,
}

fn parse_variant(token: &str, case: DeterministicCase, competitor_cbar: Option<f64>) -> CliResult<Variant> {
    let raw = token.trim().to_ascii_lowercase();
    let bad = |why: &str| CliError::Usage(format!("test variant '{token}': {why}"));
    let (body, criterion) = if let Some(b) = raw.strip_suffix('*') {
        (b.to_string(), Some(Criterion::Maic))
    } else if let Some((b, c)) = raw.split_once(':') {
        (b.to_string(), Some(c.parse::<Criterion>().map_err(|e| bad(&e.to_string()))?))
    } else {
        (raw.clone(), None)
    };
    let (kind_str, gls) = match body.strip_suffix("-gls") {
        Some(k) => (k, true),
        None => (body.as_str(), false),
    };
    let kind: TestKind = kind_str.parse().map_err(|e: vrcoint::Error| bad(&e.to_string()))?;
    if criterion.is_some() && !kind.uses_lags() {
        return Err(bad("only ADF and MSB take a lag criterion"));
    }
    let detrend = if gls {
        let c_bar = match kind {
            TestKind::Vr => table_cbar(case, 1).ok_or_else(|| bad("no tabulated c_bar for this case"))?,
            TestKind::Zalpha => return Err(bad("Zalpha is only defined for OLS detrending")),
            _ => competitor_cbar.ok_or_else(|| bad("pass --competitor-cbar for GLS ADF/MSB"))?,
        };
        DetrendMode::Gls { c_bar }
    } else {
        DetrendMode::Ols
    };
    let criterion = criterion.unwrap_or(Criterion::Aic);
    let mut label = kind.to_string();
    if gls {
        label.push_str("-GLS");
    }
    if kind.uses_lags() {
        match criterion {
            Criterion::Aic => {}
            Criterion::Maic => label.push('*'),
            other => label.push_str(&format!(":{other}")),
        }
    }
    let options = TestOptions { criterion, ..TestOptions::default() };
    Ok(Variant { spec: TestSpec::new(kind, detrend).with_options(options), label })
}

fn default_variants(case: DeterministicCase, competitor_cbar: Option<f64>) -> Vec<&'static str> {
    let mut v = vec!["vr"];
    if case != DeterministicCase::D0 {
        v.push("vr-gls");
    }
    v.extend(["adf", "adf*"]);
    if case != DeterministicCase::D0 && competitor_cbar.is_some() {
        v.extend(["adf-gls", "adf-gls*", "msb-gls*"]);
    }
    v.extend(["msb", "zalpha"]);
    v
}

fn pivot_path(args: &SimulateArgs) -> PathBuf {
    args.pivot.clone().unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".pivot.csv");
        PathBuf::from(p)
    })
}

pub fn run(mut args: SimulateArgs, workers: usize) -> CliResult<String> {
    if args.full_scale {
        args.reps = 5000;
        args.dynamics = "all".into();
        args.r2 = vec![0.0, 0.4, 0.8];
        args.t_grid = vec![100, 250];
    }
    if args.c_grid.is_empty() {
        args.c_grid = match args.experiment {
            Experiment::U0 => vec![-20.0],
            _ => ExperimentPlan::default_c_grid(),
        };
    }
    if args.experiment == Experiment::Lap {
        return run_lap(&args, workers);
    }
    let tokens: Vec<String> = if args.tests.is_empty() {
        default_variants(args.case, args.competitor_cbar).into_iter().map(String::from).collect()
    } else {
        args.tests.clone()
    };
    let variants: Vec<Variant> = tokens
        .iter()
        .map(|t| parse_variant(t, args.case, args.competitor_cbar))
        .collect::<CliResult<_>>()?;
    let plan = ExperimentPlan {
        case: args.case,
        dynamics: parse_list(&args.dynamics, &ShortRunDynamics::study_grid(), "dynamics")?,
        r_squared: args.r2.clone(),
        t_grid: args.t_grid.clone(),
        tests: variants.iter().map(|v| v.spec).collect(),
        replications: args.reps,
        level: args.level,
        c_grid: args.c_grid.clone(),
        seed: args.seed,
        burn_in: args.burn_in,
    };
    let table = match args.experiment {
        Experiment::Size => empirical_size(&plan, &load_critvals(&args.critvals)?, workers)?,
        Experiment::Power => size_corrected_power(&plan, workers)?,
        Experiment::U0 => large_u0_power(&plan, &args.lambda, args.random_u0, workers)?,
        Experiment::Lap => unreachable!("handled above"),
    };
    write_atomic(&args.out, &table.to_csv())?;
    write_atomic(&pivot_path(&args), &pivot_table(&table, &variants, args.experiment))?;
    Ok(summary(&table, &variants))
}

fn label_of<'a>(variants: &'a [Variant], row: &vrcoint::experiments::ResultRow) -> &'a str {
    variants
        .iter()
        .find(|v| v.spec.kind == row.test && v.spec.detrend == row.detrend && v.spec.criterion_label() == row.criterion)
        .map_or("?", |v| v.label.as_str())
}

fn pivot_table(table: &RejectionTable, variants: &[Variant], experiment: Experiment) -> String {
    let n_tests = variants.len();
    let rows: Vec<(Vec<String>, String, f64)> = table
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let label = variants[i % n_tests].label.clone();
            let base = vec![r.case.to_string(), r.t.to_string(), r.r2.to_string()];
            match experiment {
                // Table layout: tests down, dynamics across.
                Experiment::Size => ([base, vec![label]].concat(), r.dynamics.to_string(), r.value),
                Experiment::Power => ([base, vec![r.dynamics.to_string(), r.c.to_string()]].concat(), label, r.value),
                _ => (
                    [base, vec![r.dynamics.to_string(), r.c.to_string(), r.lambda_u.to_string()]].concat(),
                    label,
                    r.value,
                ),
            }
        })
        .collect();
    let index: &[&str] = match experiment {
        Experiment::Size => &["case", "T", "r2", "test"],
        Experiment::Power => &["case", "T", "r2", "dynamics", "c"],
        _ => &["case", "T", "r2", "dynamics", "c", "lambda_u"],
    };
    pivot(index, &rows)
}

fn summary(table: &RejectionTable, variants: &[Variant]) -> String {
    let mut out = format!("{} cells, plan {}\n", table.rows.len(), &table.plan_hash[..16]);
    for r in table.rows.iter().take(40) {
        let _ = writeln!(
            out,
            "  {:<10} {:<14} r2={:<4} T={:<4} c={:<6} lambda={:<4} {:.4}",
            label_of(variants, r),
            r.dynamics.to_string(),
            r.r2,
            r.t,
            r.c,
            r.lambda_u,
            r.value
        );
    }
    if table.rows.len() > 40 {
        out.push_str("  ...\n");
    }
    out
}

fn run_lap(args: &SimulateArgs, workers: usize) -> CliResult<String> {
    let tests: Vec<TestKind> = if args.tests.is_empty() {
        match args.detrend {
            Detrend::Ols => TestKind::ALL.to_vec(),
            Detrend::Gls => vec![TestKind::Vr, TestKind::Adf, TestKind::Msb],
        }
    } else {
        parse_list(&args.tests.join(","), &TestKind::ALL, "test")?
    };
    let detrend = match args.detrend {
        Detrend::Ols => DetrendMode::Ols,
        Detrend::Gls => DetrendMode::Gls {
            c_bar: match crate::parse_cbar(&args.cbar)? {
                Some(v) => v,
                None => crate::tabulated_cbar(args.case, args.m)?,
            },
        },
    };
    let c_grid = args.c_grid.clone();
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    let mut pivot_rows = Vec::new();
    for &r2 in &args.r2 {
        let design = PowerDesign {
            case: args.case,
            detrend,
            m: args.m,
            r_squared: r2,
            c_grid: c_grid.clone(),
            level: args.level,
            replications: args.reps,
            grid_n: args.grid,
            seed: args.seed,
        };
        let curves = local_power_curves(&tests, &design, workers)?;
        for (test, curve) in tests.iter().zip(&curves) {
            for (&c, &power) in c_grid.iter().zip(curve) {
                let _ = writeln!(
                    out,
                    "lap,{test},{},{detrend},,limit,{r2},{},{c},0,{power},{},{},",
                    args.case, args.grid, args.reps, args.seed
                );
                pivot_rows.push((vec![args.case.to_string(), detrend.to_string(), r2.to_string(), c.to_string()], test.to_string(), power));
            }
        }
    }
    write_atomic(&args.out, &out)?;
    write_atomic(&pivot_path(args), &pivot(&["case", "detrend", "r2", "c"], &pivot_rows))?;
    Ok(format!("local power curves for {} tests written to {}\n", tests.len(), args.out.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_tokens() {
        let v = parse_variant("adf-gls*", DeterministicCase::D2, Some(-13.5)).unwrap();
        assert_eq!(v.label, "ADF-GLS*");
        assert_eq!(v.spec.detrend, DetrendMode::Gls { c_bar: -13.5 });
        assert_eq!(v.spec.options.criterion, Criterion::Maic);
        let v = parse_variant("vr-gls", DeterministicCase::D1, None).unwrap();
        assert_eq!(v.spec.detrend, DetrendMode::Gls { c_bar: -40.25 });
        assert_eq!(parse_variant("msb:bic", DeterministicCase::D1, None).unwrap().label, "MSB:BIC");
        assert!(parse_variant("zalpha-gls", DeterministicCase::D1, None).is_err());
        assert!(parse_variant("adf-gls", DeterministicCase::D1, None).is_err());
        assert!(parse_variant("vr*", DeterministicCase::D1, None).is_err());
    }
}

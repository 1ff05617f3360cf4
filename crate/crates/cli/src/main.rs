mod data;
mod error;
mod output;
mod report;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vrcoint::asymptotics::{
    calibrate_cbar, table_cbar, tabulate, CriticalValues, TableKey, TabulationRequest, DEFAULT_LEVELS,
};
use vrcoint::statistics::{Bandwidth, KernelKind, KernelSpec, LagWindow};
use vrcoint::{run_test, Criterion, DeterministicCase, DetrendMode, TestKind, TestOptions};

use crate::data::{check_collinearity, load, LoadOptions};
use crate::error::{CliError, CliResult};
use crate::output::write_atomic;
use crate::report::TestReport;

#[derive(Parser)]
#[command(name = "vrcoint", version, about = "Variance ratio and residual-based tests for the null of no cointegration")]
struct Cli {
    /// Worker threads for simulations (0 uses every core).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run no-cointegration tests on columns of a CSV file.
    Test(TestArgs),
    /// Tabulate null critical values by simulating the limit distributions.
    Tabulate(TabulateArgs),
    /// Find the GLS detrending constant giving local power one half.
    CalibrateCbar(CalibrateArgs),
    /// Finite-sample and local asymptotic Monte Carlo studies.
    Simulate(simulate::SimulateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Detrend {
    Ols,
    Gls,
}

#[derive(Args)]
struct TestArgs {
    /// CSV file with a header row.
    input: PathBuf,
    /// Dependent variable column.
    #[arg(long)]
    lhs: String,
    /// Regressor columns (comma separated).
    #[arg(long, value_delimiter = ',', required = true)]
    rhs: Vec<String>,
    #[arg(long, default_value = "d1")]
    case: DeterministicCase,
    #[arg(long, value_enum, default_value_t = Detrend::Ols)]
    detrend: Detrend,
    /// GLS constant: a number, or `auto` for the tabulated VR value.
    #[arg(long, default_value = "auto")]
    cbar: String,
    /// vr, adf, msb, zalpha (comma separated) or all.
    #[arg(long, default_value = "vr")]
    test: String,
    #[arg(long, default_value = "aic")]
    criterion: Criterion,
    #[arg(long, default_value = "qs")]
    kernel: KernelKind,
    /// `andrews` or a fixed positive bandwidth.
    #[arg(long, default_value = "andrews")]
    bandwidth: Bandwidth,
    #[arg(long, default_value = "truncated")]
    lag_window: LagWindow,
    #[arg(long)]
    pmax: Option<usize>,
    /// Fixed ADF/MSB lag order instead of criterion-based selection.
    #[arg(long)]
    lag: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    level: f64,
    /// Use only the last N observations.
    #[arg(long)]
    last: Option<usize>,
    /// Take natural logarithms of the selected columns.
    #[arg(long)]
    log: bool,
    /// Critical value files searched before the bundled table.
    #[arg(long)]
    critvals: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TabDetrend {
    Ols,
    Gls,
    Both,
}

#[derive(Args)]
struct TabulateArgs {
    /// vr, adf, msb, zalpha (comma separated) or all.
    #[arg(long, default_value = "vr")]
    test: String,
    /// d0, d1, d2 (comma separated) or all.
    #[arg(long, default_value = "all")]
    case: String,
    #[arg(long, value_enum, default_value_t = TabDetrend::Ols)]
    detrend: TabDetrend,
    /// GLS constant, or `auto` for the tabulated VR value at each m.
    #[arg(long, default_value = "auto")]
    cbar: String,
    /// `a-b`, `a..b` or a comma separated list.
    #[arg(long, default_value = "1-5")]
    m_range: String,
    #[arg(long, value_delimiter = ',')]
    levels: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    #[arg(long, default_value_t = 10_000)]
    grid: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    case: DeterministicCase,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    #[arg(long, default_value_t = 10_000)]
    grid: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

pub fn parse_list<T: std::str::FromStr>(raw: &str, all: &[T], what: &str) -> CliResult<Vec<T>>
where
    T: Clone,
    T::Err: std::fmt::Display,
{
    if raw.trim().eq_ignore_ascii_case("all") {
        return Ok(all.to_vec());
    }
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<T>().map_err(|e| CliError::Usage(format!("invalid {what} '{s}': {e}"))))
        .collect()
}

fn parse_m_range(raw: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Usage(format!("invalid m range '{raw}'"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let range = raw.split_once("..").or_else(|| raw.split_once('-'));
    let out: Vec<usize> = match range {
        Some((a, b)) => (num(a)?..=num(b)?).collect(),
        None => raw.split(',').map(num).collect::<CliResult<_>>()?,
    };
    if out.is_empty() || out.contains(&0) {
        return Err(bad());
    }
    Ok(out)
}

/// `None` for `auto`.
fn parse_cbar(raw: &str) -> CliResult<Option<f64>> {
    if raw.trim().eq_ignore_ascii_case("auto") {
        return Ok(None);
    }
    raw.trim()
        .parse::<f64>()
        .map(Some)
        .map_err(|_| CliError::Usage(format!("--cbar must be 'auto' or a number, got '{raw}'")))
}

fn tabulated_cbar(case: DeterministicCase, m: usize) -> CliResult<f64> {
    table_cbar(case, m).ok_or_else(|| CliError::Usage(format!("no tabulated c_bar for {case}, m = {m}; pass --cbar")))
}

pub fn load_critvals(paths: &[PathBuf]) -> CliResult<CriticalValues> {
    let mut out = CriticalValues::default();
    for p in paths {
        if !p.exists() {
            return Err(CliError::FileNotFound(p.clone()));
        }
        out.extend(CriticalValues::from_csv(&std::fs::read_to_string(p)?)?);
    }
    out.extend(CriticalValues::bundled());
    Ok(out)
}

fn cmd_test(args: TestArgs) -> CliResult<String> {
    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(CliError::Usage(format!("--level must lie in (0, 1), got {}", args.level)));
    }
    let requested_all = args.test.trim().eq_ignore_ascii_case("all");
    let kinds = parse_list(&args.test, &TestKind::ALL, "test")?;
    let cbar = parse_cbar(&args.cbar)?;
    let data = load(&args.input, &LoadOptions { lhs: &args.lhs, rhs: &args.rhs, last: args.last, log: args.log })?;
    check_collinearity(&data, args.case)?;
    let (t, m) = (data.y.len(), data.x.ncols());
    let tables = load_critvals(&args.critvals)?;
    let options = TestOptions {
        criterion: args.criterion,
        p_max: args.pmax,
        lag: args.lag,
        kernel: KernelSpec { kernel: args.kernel, bandwidth: args.bandwidth, window: args.lag_window },
    };
    let mut reports = Vec::new();
    for kind in kinds {
        let mode = match args.detrend {
            Detrend::Ols => DetrendMode::Ols,
            Detrend::Gls if kind == TestKind::Zalpha || (cbar.is_none() && kind != TestKind::Vr) => {
                let reason = if kind == TestKind::Zalpha {
                    "Zalpha is only defined for OLS detrending".to_string()
                } else {
                    format!("--cbar auto is only tabulated for VR; pass a value to run {kind} with GLS detrending")
                };
                if requested_all {
                    log::warn!("skipping {kind}: {reason}");
                    continue;
                }
                return Err(CliError::Usage(reason));
            }
            Detrend::Gls => DetrendMode::Gls { c_bar: cbar.map_or_else(|| tabulated_cbar(args.case, m), Ok)? },
        };
        let stat = run_test(&data.y, &data.x, args.case, mode, kind, &options)?;
        let table = tables.find(kind, args.case, mode, m);
        if table.is_none() {
            log::warn!("no critical values for {kind} {} {mode} m = {m}", args.case);
        }
        reports.push(TestReport::new(stat, m, t, table, args.level, data.provenance.clone()));
    }
    Ok(match args.format {
        Format::Json => serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n",
        Format::Text => reports.iter().map(TestReport::to_text).collect::<Vec<_>>().join("\n"),
    })
}

fn cmd_tabulate(args: TabulateArgs, workers: usize) -> CliResult<String> {
    let tests = parse_list(&args.test, &TestKind::ALL, "test")?;
    let cases = parse_list(&args.case, &DeterministicCase::ALL, "case")?;
    let m_list = parse_m_range(&args.m_range)?;
    let cbar = parse_cbar(&args.cbar)?;
    let levels = if args.levels.is_empty() { DEFAULT_LEVELS.to_vec() } else { args.levels.clone() };
    let request = |keys: Vec<TableKey>, m_list: Vec<usize>| TabulationRequest {
        keys,
        m_list,
        levels: levels.clone(),
        replications: args.reps,
        grid_n: args.grid,
        seed: args.seed,
    };
    let mut requests = Vec::new();
    if matches!(args.detrend, TabDetrend::Ols | TabDetrend::Both) {
        let keys = tests
            .iter()
            .flat_map(|&test| cases.iter().map(move |&case| TableKey { test, case, detrend: DetrendMode::Ols }))
            .collect();
        requests.push(request(keys, m_list.clone()));
    }
    if matches!(args.detrend, TabDetrend::Gls | TabDetrend::Both) {
        // Under GLS only D1/D2 exist, Zalpha has no limit, and `auto` only covers VR.
        let gls_tests: Vec<TestKind> = tests
            .iter()
            .copied()
            .filter(|t| *t != TestKind::Zalpha && (cbar.is_some() || *t == TestKind::Vr))
            .collect();
        let gls_cases: Vec<DeterministicCase> = cases.iter().copied().filter(|c| *c != DeterministicCase::D0).collect();
        let keys_for = |c_bar: &dyn Fn(DeterministicCase) -> CliResult<f64>| -> CliResult<Vec<TableKey>> {
            let mut keys = Vec::new();
            for &test in &gls_tests {
                for &case in &gls_cases {
                    keys.push(TableKey { test, case, detrend: DetrendMode::Gls { c_bar: c_bar(case)? } });
                }
            }
            Ok(keys)
        };
        match cbar {
            Some(v) => requests.push(request(keys_for(&|_| Ok(v))?, m_list.clone())),
            None => {
                for &m in &m_list {
                    requests.push(request(keys_for(&|case| tabulated_cbar(case, m))?, vec![m]));
                }
            }
        }
    }
    requests.retain(|r| !r.keys.is_empty());
    if requests.is_empty() {
        return Err(CliError::Usage("no valid (test, case, detrend) combination selected".into()));
    }
    let mut tables = CriticalValues::default();
    for r in &requests {
        let tab = tabulate(r, workers)?;
        if tab.resamples > 0 {
            log::info!("{} replications redrawn after singular moment matrices", tab.resamples);
        }
        tables.extend(tab.tables);
    }
    let csv = tables.to_csv();
    match &args.out {
        Some(path) => {
            write_atomic(path, &csv)?;
            Ok(String::new())
        }
        None => Ok(csv),
    }
}

fn cmd_calibrate(args: CalibrateArgs, workers: usize) -> CliResult<String> {
    let cal = calibrate_cbar(args.case, args.m, args.reps, args.grid, args.seed, workers)?;
    Ok(match args.format {
        Format::Json => {
            let v = serde_json::json!({
                "case": args.case,
                "m": args.m,
                "c_bar": cal.c_bar,
                "power": cal.power,
                "replications": args.reps,
                "grid_n": args.grid,
                "seed": args.seed,
            });
            serde_json::to_string_pretty(&v).expect("json") + "\n"
        }
        Format::Text => format!(
            "c_bar {} (power {} at c = c_bar; case {}, m = {}, {} replications, grid {}, seed {})\n",
            cal.c_bar, cal.power, args.case, args.m, args.reps, args.grid, args.seed
        ),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Tabulate(a) => cmd_tabulate(a, cli.workers),
        Command::CalibrateCbar(a) => cmd_calibrate(a, cli.workers),
        Command::Simulate(a) => simulate::run(a, cli.workers),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m_ranges() {
        assert_eq!(parse_m_range("1-3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_m_range("2..4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_m_range("1,5").unwrap(), vec![1, 5]);
        assert!(parse_m_range("0-2").is_err());
        assert!(parse_m_range("x").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list("all", &TestKind::ALL, "test").unwrap().len(), 4);
        assert_eq!(parse_list("vr,zalpha", &TestKind::ALL, "test").unwrap(), vec![TestKind::Vr, TestKind::Zalpha]);
        assert!(parse_list("vr,foo", &TestKind::ALL, "test").is_err());
        assert_eq!(parse_cbar("auto").unwrap(), None);
        assert_eq!(parse_cbar("-7").unwrap(), Some(-7.0));
    }
}

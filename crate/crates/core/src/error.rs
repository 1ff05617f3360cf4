use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("regressor matrix is rank deficient (effective rank {rank} < {columns} columns)")]
    RankDeficient { rank: usize, columns: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("invalid deterministic case: {0}")]
    InvalidCase(String),

    #[error("sample too small: {0}")]
    SampleTooSmall(String),

    #[error("residuals are degenerate (zero sum of squares)")]
    DegenerateResiduals,

    #[error("1 - sum of lagged-difference coefficients is numerically zero ({0:e})")]
    NearSingularArSum(f64),

    #[error("singular regressor moment matrix in limit simulation")]
    NumericalSingularity,

    #[error("no c_bar in [{lower}, 0] brackets power 0.5 (power {power_at_lower:.4} at the lower end)")]
    NoSolutionInRange { lower: f64, power_at_lower: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("|rho| = 1 leaves the initial value scaling undefined")]
    UnitRho,

    #[error("no critical value for {0}")]
    MissingCriticalValue(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed critical value table at line {line}: {reason}")]
    TableFormat { line: usize, reason: String },
}

impl Error {
    /// True for failures that come from the numerics rather than from bad
    /// user input or configuration.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::RankDeficient { .. }
                | Error::DegenerateResiduals
                | Error::NearSingularArSum(_)
                | Error::NumericalSingularity
                | Error::NoSolutionInRange { .. }
        )
    }
}

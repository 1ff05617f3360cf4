use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("column '{0}' not found in the header")]
    ColumnNotFound(String),

    #[error("column '{column}' row {row}: '{value}' is not a number")]
    NonNumericData { column: String, row: usize, value: String },

    #[error("column '{column}' row {row}: log of nonpositive value {value}")]
    NonPositiveLog { column: String, row: usize, value: f64 },

    #[error("column '{column}' is collinear with the deterministic terms and the columns before it ({detail})")]
    Collinear { column: String, detail: vrcoint::Error },

    #[error("malformed input: {0}")]
    Csv(#[from] csv::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] vrcoint::Error),
}

impl CliError {
    /// 1 usage, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        use vrcoint::Error as E;
        match self {
            CliError::Usage(_) => 1,
            CliError::Collinear { .. } => 3,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(E::InvalidConfig(_) | E::InvalidCase(_) | E::UnitRho) => 1,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

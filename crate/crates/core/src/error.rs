use thiserror::Error;

/// Errors raised anywhere in the fitting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("evaluation point {value} outside [{lower}, {upper}]")]
    OutOfDomain { value: f64, lower: f64, upper: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("infeasible start: violated constraint rows {rows:?}")]
    InfeasibleStart { rows: Vec<usize> },

    #[error("infeasible region: empty interval on coordinate {coordinate}")]
    InfeasibleRegion { coordinate: usize },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("insufficient draws: need at least {needed}, got {got}")]
    InsufficientDraws { needed: usize, got: usize },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("csv error at line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error("engine bug: {0}")]
    EngineBug(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 1 validation, 2 numerical failure, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NumericalFailure(_)
            | Error::InfeasibleRegion { .. }
            | Error::EngineBug(_) => 2,
            Error::Io(_) => 3,
            _ => 1,
        }
    }

    /// Short machine-readable tag used in error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateData(_) => "DegenerateData",
            Error::OutOfDomain { .. } => "OutOfDomain",
            Error::NumericalFailure(_) => "NumericalFailure",
            Error::InfeasibleStart { .. } => "InfeasibleStart",
            Error::InfeasibleRegion { .. } => "InfeasibleRegion",
            Error::ContractViolation(_) => "ContractViolation",
            Error::Schema(_) => "SchemaError",
            Error::Data(_) => "DataError",
            Error::InsufficientDraws { .. } => "InsufficientDraws",
            Error::Usage(_) => "UsageError",
            Error::Config { .. } => "ConfigError",
            Error::Csv { .. } => "CsvError",
            Error::EngineBug(_) => "EngineBug",
            Error::Io(_) => "IoError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

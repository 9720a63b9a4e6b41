//! CLI error classes mapped to exit codes: 2 configuration, 3 data,
//! 4 numerical failure.

use scnlab::dataio::DataError;
use scnlab::diagnostics::DiagError;
use scnlab::ncl::NclError;
use scnlab::numkit::NumError;
use scnlab::scn::ScnError;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Data(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub type Result<T> = std::result::Result<T, CliError>;

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<NumError> for CliError {
    fn from(e: NumError) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<ScnError> for CliError {
    fn from(e: ScnError) -> Self {
        match e {
            ScnError::Config(m) => CliError::Config(m),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<NclError> for CliError {
    fn from(e: NclError) -> Self {
        match e {
            NclError::Parameter(m) => CliError::Config(m),
            NclError::Shape(m) => CliError::Data(m),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<DiagError> for CliError {
    fn from(e: DiagError) -> Self {
        match e {
            DiagError::Parameter(m) => CliError::Config(m),
            DiagError::Data(d) => CliError::Data(d.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

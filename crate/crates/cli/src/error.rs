use crate::expr::ParseError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{field}: {source}")]
    Expression {
        field: String,
        #[source]
        source: ParseError,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("config file, line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Library(#[from] vofrac::Error),

    #[error("identity not verified: final |residual| = {residual:e} exceeds tolerance {tolerance:e}")]
    IdentityFailed { residual: f64, tolerance: f64 },

    #[error("optimizer stopped after {iterations} iterations with gradient norm {gradient_norm:e}")]
    Stalled { iterations: usize, gradient_norm: f64 },

    #[error("{failed} selftest check(s) failed")]
    SelftestFailed { failed: usize },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// Process exit status: 2 parse/config, 3 validity, 4 failed identity or
    /// selftest, 5 optimizer stall, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Expression { .. } | CliError::Config(_) | CliError::Json { .. } => 2,
            CliError::Library(e) => match e {
                vofrac::Error::Config(_) => 2,
                vofrac::Error::Validity { .. }
                | vofrac::Error::Hypothesis(_)
                | vofrac::Error::Domain(_)
                | vofrac::Error::Precondition(_) => 3,
                vofrac::Error::NonFinite(_) => 1,
            },
            CliError::IdentityFailed { .. } | CliError::SelftestFailed { .. } => 4,
            CliError::Stalled { .. } => 5,
            CliError::Io(_) => 1,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        // serde_json appends its own position to the message; keep just the text.
        let full = e.to_string();
        let message = match full.rfind(" at line ") {
            Some(i) => full[..i].to_string(),
            None => full,
        };
        CliError::Json {
            line: e.line(),
            column: e.column(),
            message,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the set where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The fractional order left its admissible range.
    #[error("order value {value} at (t, tau) = ({t}, {tau}) is outside {bounds}")]
    Validity {
        t: f64,
        tau: f64,
        value: f64,
        bounds: String,
    },

    /// The declared order regime does not match what an identity needs.
    #[error("hypothesis not met: {0}")]
    Hypothesis(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for errors caused by an order function or regime that is out of bounds.
    pub fn is_validity(&self) -> bool {
        matches!(self, Error::Validity { .. } | Error::Hypothesis(_))
    }
}

use thiserror::Error;

/// Errors produced by the analytic and simulation layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature did not reach the requested tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Accuracy { estimate: f64, error_bound: f64 },

    /// A Bell-polynomial evaluation overflowed at order `n`.
    #[error("range error: Bell term {n} is not finite")]
    Range { n: usize },

    /// The partition-sum reference was asked for an order it does not support.
    #[error("unsupported size: n = {n} exceeds cap {cap}")]
    UnsupportedSize { n: usize, cap: usize },

    /// The operation is not defined for the configured tagged-transmitter mode.
    #[error("operation requires {0} tagged mode")]
    UnsupportedMode(&'static str),

    /// The requested quantity is infinite for this configuration.
    #[error("divergent quantity: {0}")]
    Divergence(&'static str),

    /// An integral over the interferer field failed for the given alpha index.
    #[error("alpha_{index}: {source}")]
    Alpha {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    /// Malformed configuration (file, flag or sweep specification).
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    /// Short stable code used in CSV error cells (`ERR:<code>`).
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Accuracy { .. } => "accuracy",
            Error::Range { .. } => "range",
            Error::UnsupportedSize { .. } => "unsupported-size",
            Error::UnsupportedMode(_) => "unsupported-mode",
            Error::Divergence(_) => "divergence",
            Error::Alpha { source, .. } => source.code(),
            Error::Config(_) => "config",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

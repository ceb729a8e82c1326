use thiserror::Error;

/// Library-wide error type.
///
/// `Uncovered` and `Hypothesis` mark *mathematically meaningful* refusals: the
/// requested configuration falls outside every regime the library can certify,
/// or violates a standing assumption (supercriticality, symmetry, ...). Callers
/// that surface exit codes should map those to a distinct "bad configuration"
/// status rather than a generic failure.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric or structural parameter is out of range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A target-set expression could not be parsed.
    #[error("cannot parse target set `{input}`: {reason}")]
    SetParse { input: String, reason: String },

    /// A standing model hypothesis is violated (e.g. subcritical offspring).
    #[error("model hypothesis violated: {0}")]
    Hypothesis(String),

    /// The configuration is valid but no covered regime applies to it.
    #[error("configuration not covered by any implemented regime: {0}")]
    Uncovered(String),

    /// A supported operation was asked to run outside its implemented scope.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Simulated population exceeded the configured cap.
    #[error("population cap {cap:.3e} exceeded at generation {generation}")]
    CapExceeded { generation: u32, cap: f64 },

    /// Exact computation would need more states than the configured limit.
    #[error("exact state space too large: {states} states exceeds limit {limit}")]
    StateSpace { states: u64, limit: u64 },

    /// An iterative solver failed to reach its tolerance.
    #[error("no convergence: {0}")]
    NoConverge(String),

    /// Too few usable points to fit a decay rate.
    #[error("fit rejected: {0}")]
    Fit(String),

    /// An I/O problem while reading or writing artifacts.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

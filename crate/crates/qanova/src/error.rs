//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An operation that needs data received an empty sample.
    #[error("empty sample")]
    EmptySample,

    /// A sample was too small for the requested statistic.
    #[error("sample of size {n} is too small: {reason}")]
    SampleTooSmall { n: usize, reason: &'static str },

    /// Inputs must be finite real numbers.
    #[error("non-finite value {value} in input")]
    NonFinite { value: f64 },

    /// The continued fraction for the regularized incomplete beta failed to
    /// converge within the iteration budget.
    #[error("incomplete beta continued fraction did not converge (x={x}, a={a}, b={b}, {max_iter} iterations)")]
    NoConvergence {
        x: f64,
        a: f64,
        b: f64,
        max_iter: usize,
    },

    /// Quantile weights drifted too far from a unit sum to renormalize.
    #[error("weights summed to {sum:e}, too far from 1 to renormalize")]
    WeightSum { sum: f64 },

    /// A grouped-data operation needs at least two groups.
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),

    /// Every candidate projection direction was skipped, so no depth can be
    /// assigned. Heavy ties or tiny samples collapse the bootstrap cloud;
    /// larger samples or a different quantile usually resolve this.
    #[error(
        "degenerate cloud: every projection direction was skipped \
         (heavy ties or too little variation in the bootstrap estimates); \
         larger samples or a different target quantile usually resolve this"
    )]
    DegenerateCloud,

    /// A caller-supplied parameter was rejected.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A simulation configuration could not be parsed or validated.
    #[error("config error: {0}")]
    Config(String),
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates a precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The noise standard deviation is zero where a proper joint density is
    /// required.
    #[error("noise standard deviation is zero; the joint density is degenerate")]
    DegenerateChannel,

    /// An integrand evaluated to NaN or infinity at a quadrature node.
    #[error("integrand is not finite at x = {x}")]
    NonFiniteIntegrand { x: f64 },

    /// The threshold optimizer exhausted its iteration budget.
    #[error("optimizer did not converge within {iterations} iterations")]
    OptimizerNonConvergence { iterations: usize },

    /// Alice's and Bob's bit strings have different lengths.
    #[error("bit string lengths differ: alice has {alice}, bob has {bob}")]
    LengthMismatch { alice: usize, bob: usize },

    /// A hash output longer than its input was requested.
    #[error("requested output of {target} bits exceeds the {input}-bit input")]
    TargetLengthExceedsInput { target: usize, input: usize },

    /// A brute-force enumeration would visit too many states.
    #[error("state space too large to enumerate: {states} states (limit {limit})")]
    EnumerationTooLarge { states: u128, limit: u128 },
}

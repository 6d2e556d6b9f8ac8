use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("variable x{index} out of range for n = {n}")]
    VariableOutOfRange { index: usize, n: usize },
    #[error("negative exponent at position {position}")]
    NegativeExponent { position: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("angular component undefined for zero")]
    UndefinedForZero,
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("p = 2 is not supported for twisted characters")]
    EvenPrimeUnsupported,
    #[error("modulus {0} too large for a character table")]
    ModulusTooLarge(u64),
    #[error("{0} is not a unit")]
    NonUnitArgument(u64),
    #[error("Gauss sum requested for the trivial character")]
    TrivialCharacter,

    #[error("budget exceeded: {needed} > {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("system does not have good reduction (witness {witness:?})")]
    BadReductionInput { witness: Vec<u64> },

    #[error("linear part at the center has rank {rank} < {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("center is not on the variety to the required precision: {0}")]
    CenterNotOnVariety(String),
    #[error("rescaled system failed good reduction: {0}")]
    GoodReductionFailed(String),

    #[error("shell count not stabilized at shell {shell}")]
    NotStabilized { shell: u32 },
    #[error("no linear recurrence found within {terms} terms")]
    NoRecurrenceFound { terms: usize },
    #[error("reconstruction failed validation at coefficient {index}")]
    ValidationFailed { index: usize },
    #[error("denominator is constant")]
    ConstantDenominator,
    #[error("denominator has poles outside the candidate set")]
    NoMatch,
    #[error("missing coefficient table: {0}")]
    MissingTable(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

use thiserror::Error;

/// Errors raised by constructions, derivations, measures and the harness.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotPrime(u64),
    #[error("value out of supported range: {0}")]
    OutOfRange(String),
    #[error("input too large: {0}")]
    TooLarge(String),
    #[error("{d} does not divide {n}")]
    NotDivisor { d: u64, n: u64 },
    #[error("polynomial has no coefficients")]
    EmptyPolynomial,
    #[error("polynomial is constant modulo {0}")]
    ConstantPolynomial(u64),
    #[error("polynomial has a repeated root modulo {0}")]
    NotSquarefree(u64),
    #[error("polynomial degree {degree} is below the required minimum {min}")]
    DegreeTooSmall { degree: usize, min: usize },
    #[error("window length {s} must satisfy 1 <= s < {p}")]
    RangeTooLong { s: u64, p: u64 },
    #[error("angle window [{alpha}, {beta}) must satisfy alpha < beta <= alpha + 1")]
    BadWindow { alpha: String, beta: String },
    #[error("at least one of the multiplicative and additive characters must be nontrivial")]
    TrivialCharacters,
    #[error("character order {order} must be >= 2 and divide {p} - 1")]
    BadCharacter { order: u64, p: u64 },
    #[error("residue {value} is outside Z_{modulus}")]
    ResidueOutOfRange { value: u64, modulus: u64 },
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("sequence derivation needs at least two elements, set has {0}")]
    TooFewElements(usize),
    #[error("parameter {name} = {value} must be at least {min}")]
    ParameterTooSmall {
        name: &'static str,
        value: u64,
        min: u64,
    },
    #[error("pattern length {len} is not in 1..={max}")]
    PatternTooLong { len: usize, max: usize },
    #[error("order {k} is not in 1..={q}")]
    OrderTooLarge { k: usize, q: u64 },
    #[error("estimated work {estimate} elementary products exceeds the budget {budget}")]
    BudgetExceeded { estimate: u128, budget: u128 },
    #[error("main term is undefined for an empty set (T = 0)")]
    DegenerateDensity,
    #[error("no prediction is available for construction kind `{0}`")]
    UnknownKind(String),
    #[error("parameter grid is empty")]
    EmptyGrid,
    #[error("invalid configuration at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

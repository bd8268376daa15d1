use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("characteristic {0} is not a prime")]
    NonPrimeCharacteristic(u32),
    #[error("characteristic 2 is not supported; the constructions need odd characteristic")]
    EvenCharacteristic,
    #[error("modulus {0} is reducible")]
    ReducibleModulus(String),
    #[error("field of order {0} is too large for table-driven arithmetic")]
    FieldTooLarge(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands live in different fields")]
    FieldMismatch,
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("polynomial {0} is not monic")]
    NonMonicPolynomial(String),
    #[error("index {index} out of range: only {available} available")]
    IndexOutOfRange { index: usize, available: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("multiplicative order exceeds the cap {0}")]
    OrderCapExceeded(u64),
    #[error("matrix is not the companion matrix of the given polynomial")]
    NotCompanionOfGivenPolynomial,
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("generator is not orthogonal with respect to the form")]
    NotOrthogonal,
    #[error("f and g coincide; pass allow_identical to build the group anyway")]
    IdenticalGenerators,
    #[error("orbit plus zero is not closed under F_q-linear combinations")]
    OrbitNotLinear,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("enumeration needs {needed} objects, budget is {budget}")]
    EnumerationBudgetExceeded { needed: String, budget: u64 },
    #[error("distance {d} invalid for a {rows}x{cols} rank code")]
    InvalidDistance { d: usize, rows: usize, cols: usize },
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("cannot pad {rows} rows down to {target}")]
    TooManyRows { rows: usize, target: usize },
    #[error("first-block code rejected: {0}")]
    BadFirstBlock(String),
    #[error("basis sizes differ: {0}")]
    BasisSizeMismatch(String),
    #[error("distance {d} out of range (max {max})")]
    DistanceOutOfRange { d: usize, max: usize },
    #[error("rank {r} out of range (max {max})")]
    RankOutOfRange { r: usize, max: usize },
    #[error("radius {r} out of range (max {max})")]
    RadiusOutOfRange { r: usize, max: usize },
    #[error("code is not linear over the extension field")]
    NotExtensionLinear,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("golden file mismatch: {0}")]
    GoldenMismatch(String),
}

impl Error {
    /// Precondition and budget errors map to CLI exit code 3.
    pub fn is_precondition(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Parse(_) | Error::GoldenMismatch(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

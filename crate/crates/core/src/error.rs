use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("characteristic {0} is not prime")]
    CompositeCharacteristic(u32),
    #[error("{0} is not a prime power")]
    NotPrimePower(u32),
    #[error("modulus {0} is not irreducible of the required degree")]
    ReducibleModulus(String),
    #[error("field of order {0} exceeds the table limit")]
    FieldTooLarge(u64),
    #[error("even characteristic is not supported")]
    EvenCharacteristicUnsupported,
    #[error("element {0} is not in the base field")]
    NotInBaseField(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("isotopy component {0} is not invertible")]
    SingularIsotopyComponent(char),
    #[error("the two Dickson parameters span a single point")]
    DegenerateLine,
    #[error("{0}")]
    UnsupportedScale(String),
    #[error("xi = {0} does not satisfy xi^(2(q-1)) = 1")]
    InvalidXi(String),
    #[error("surface spec {0} cannot be used in this slot")]
    WrongSide(String),
    #[error("point is not in the set")]
    PointNotInSet,
    #[error("matrix is not Hermitian")]
    NotHermitian,
    #[error("basis is not F_q-independent")]
    DependentBasis,
    #[error("rank spectrum sums to {got}, expected {expected}")]
    InconsistentSpectrum { expected: u64, got: u64 },
    #[error("degenerate xi: {0}")]
    DegenerateXi(String),
    #[error("pencil generators are projectively dependent")]
    DegeneratePencil,
    #[error("fourfold tensor has a singular contraction")]
    SingularFourfold,
    #[error("d-invariant is {0}, not 4")]
    NotRankFour(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

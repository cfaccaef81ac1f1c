use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("modulus must be greater than 1, got {0}")]
    BadModulus(i64),
    #[error("rank must be at least 1")]
    BadRank,
    #[error("no table entry for residue class {0:?}")]
    MissingResidue(Vec<u64>),
    #[error("residue class {0:?} appears more than once")]
    DuplicateResidue(Vec<u64>),
    #[error("residue representative {0:?} has a coordinate outside [0, d)")]
    ResidueOutOfRange(Vec<BigInt>),
    #[error("m*x + r is not divisible by d for residue class {residue:?} (coordinate {coordinate})")]
    Divisibility { residue: Vec<u64>, coordinate: usize },
    #[error("multiplier for residue class {0:?} is not positive")]
    NonpositiveMultiplier(Vec<u64>),
    #[error("expected a vector of length {expected}, got {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("step left a remainder: the map does not satisfy the divisibility condition")]
    InternalDivisibility,
    #[error("{what}: size {size} exceeds the limit {limit}")]
    SizeGuard { what: &'static str, size: u128, limit: u128 },
    #[error("the shift vectors do not span the ambient space")]
    ShiftsDontSpan,
    #[error("the zero vector is not allowed here")]
    ZeroPoint,
    #[error("the shift vectors are not acute")]
    NotAcute,
    #[error("the map is not of relatively prime type")]
    NotRelativelyPrime,
    #[error("{count} forms exceed the arrangement limit of {limit}")]
    TooManyForms { count: usize, limit: usize },
    #[error("distinct multiplier products exceed the state limit of {0}")]
    StateGuard(usize),
    #[error("at least one sample is required")]
    EmptySample,
    #[error("coefficient does not fit in a machine integer: {0}")]
    CoefficientOverflow(String),
    #[error("Fourier-Motzkin elimination produced more than {0} constraints")]
    FeasibilityBlowup(usize),
    #[error("cannot parse catalog name {0:?}")]
    UnknownCatalog(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

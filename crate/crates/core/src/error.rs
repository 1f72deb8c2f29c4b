use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid scalar {0:?}")]
    BadScalar(String),

    #[error("triangle vertices are collinear")]
    DegenerateTriangle,

    #[error("edge {0}-{1} is vertical")]
    VerticalEdge(usize, usize),

    #[error("invalid TIN: {0}")]
    InvalidTin(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("wedge lines are parallel")]
    ParallelLines,

    #[error("polygon is not strictly convex and counterclockwise")]
    NotConvex,

    #[error("prime #{0} divides a denominator")]
    BadPrime(usize),

    #[error("not enough primes to reconstruct the result")]
    InsufficientPrimes,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

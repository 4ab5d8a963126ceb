use thiserror::Error;

/// Errors surfaced by the library. Domain errors map to CLI exit code 1,
/// usage errors to 64.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NonPrime(u32),
    #[error("defining polynomial is reducible over F_{0}")]
    ReduciblePolynomial(u32),
    #[error("defining polynomial has degree {got}, expected {want}")]
    DegreeMismatch { want: usize, got: usize },
    #[error("{0} does not divide {1}")]
    NotADivisor(u32, u32),
    #[error("ambient dimensions differ: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error("enumeration of {0} objects exceeds the guard of {1}")]
    TooLarge(u128, u128),
    #[error("extension constraint is infeasible: {0}")]
    ConstraintInfeasible(String),
    #[error("the zero subspace defines no linear set")]
    ZeroSubspace,
    #[error("vector count {0} at a point is not of the form q^w - 1 (arithmetic bug)")]
    NonPowerCount(u64),
    #[error("alpha lies in the ground field")]
    AlphaInGroundField,
    #[error("point is not in the canonical subgeometry")]
    NotInSigma,
    #[error("degenerate projection scene: {0}")]
    DegenerateScene(String),
    #[error("invalid construction parameters: {0}")]
    InvalidParams(String),
    #[error("projection vertex is not disjoint from the subgeometry or the target")]
    PiNotDisjoint,
    #[error("lines are not pairwise disjoint")]
    NotDisjoint,
    #[error("rank-2 points are not collinear in the vertex")]
    NotCollinearInPi,
    #[error("infeasible verification scope: {0}")]
    InfeasibleScope(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("degenerate cube: {0}")]
    DegenerateCube(String),

    #[error("incompatible period: cell side {period} does not divide K = {k}")]
    IncompatiblePeriod { period: usize, k: usize },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("constant potential refused; pass allow_constant to override")]
    ConstantPotential,

    #[error("singular operator: the potential vanishes identically on the torus")]
    SingularOperator,

    #[error("iteration limit hit after {iterations} iterations, residual {residual:.3e}")]
    IterationLimit { iterations: usize, residual: f64 },

    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("parity error: K = {k} must be even for dual transforms")]
    Parity { k: usize },

    #[error("mu = {mu:.6e} is too small for this torus; minimal admissible mu is {min_mu:.6e}")]
    MuTooSmall { mu: f64, min_mu: f64 },

    #[error("scale error: 3*{ell} exceeds K = {k}")]
    ScaleTooLarge { ell: usize, k: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("window error: {0}")]
    Window(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("shift degeneracy: factorization kept breaking down near shift {shift:.6e}")]
    ShiftDegeneracy { shift: f64 },

    #[error("precondition violated at site {site}: {what}")]
    Precondition { site: usize, what: String },

    #[error("parameter out of range: {0}")]
    ParameterRange(String),

    #[error("memory guard: {0}")]
    MemoryGuard(String),

    #[error("matrix not positive definite: pivot {pivot:.3e} at index {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("numerical check failed: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("realization {index} (seed {seed}) failed: {source}")]
    Realization {
        index: u64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

use thiserror::Error;

use crate::fixed_point::FixedPointReport;
use crate::projection::MinSeqReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("gram matrix is not symmetric: entry ({row}, {col}) differs from its transpose")]
    NotSymmetric { row: usize, col: usize },
    #[error("gram matrix is not positive definite: pivot {pivot} at index {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate sample: drew coinciding points {retries} times")]
    DegenerateSample { retries: usize },
    #[error("not a contraction: claimed Lipschitz constant {k} is not below 1")]
    NotAContraction { k: f64 },
    #[error("invalid Lipschitz constant {k}: must be finite and nonnegative")]
    InvalidLipschitz { k: f64 },
    #[error("invalid contraction parameters: k = {k}, d01 = {d01}")]
    InvalidContraction { k: f64, d01: f64 },
    #[error("invalid tolerance {0}: must be finite and positive")]
    InvalidTolerance(f64),
    #[error("fixed-point iteration did not converge within {} iterations", report.iterations)]
    MaxIterationsExceeded { report: Box<FixedPointReport> },

    #[error("subspace basis is rank deficient: reduced pivot {pivot} at column {index}")]
    RankDeficientBasis { index: usize, pivot: f64 },
    #[error("minimizing sequence did not reach tolerance within {} steps", report.iterates.len().saturating_sub(1))]
    BudgetExceeded { report: Box<MinSeqReport> },

    #[error("bilinear form is not coercive: alpha = {alpha}")]
    NotCoercive { alpha: f64 },
    #[error("inconsistent constants: alpha = {alpha} exceeds C = {continuity}")]
    InconsistentConstants { alpha: f64, continuity: f64 },
    #[error("rho = {rho} outside the admissible interval (0, {upper})")]
    RhoOutOfRange { rho: f64, upper: f64 },
    #[error("linear system is singular")]
    SingularSystem,

    #[error("invalid mesh: {0}")]
    MeshInvalid(String),
    #[error("unknown manufactured case {0:?}")]
    UnknownCase(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors produced by grid construction, state validation, transforms and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("points per axis must be even, got {0}")]
    OddPoints(usize),
    #[error("points per axis must be at least 8, got {0}")]
    TooFewPoints(usize),
    #[error("degenerate position bounds: x_min = {x_min}, x_max = {x_max}")]
    DegenerateBounds { x_min: f64, x_max: f64 },
    #[error("hbar must be positive, got {0}")]
    NonPositiveHbar(f64),
    #[error("grid must have at least one degree of freedom")]
    ZeroDegrees,
    #[error("lattice index {index} out of range for axis of {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("partition ({n_a}, {n_b}) incompatible with a grid of {n} degrees of freedom")]
    PartitionMismatch { n_a: usize, n_b: usize, n: usize },
    #[error("grids differ in {what}")]
    GridMismatch { what: &'static str },

    #[error("cannot normalize the zero vector")]
    ZeroNorm,
    #[error("state leaks past the grid boundary: |amplitude| = {leak:.3e} exceeds {limit:.3e}")]
    BoundaryLeak { leak: f64, limit: f64 },
    #[error("packet width must be positive, got {0}")]
    NonPositiveWidth(f64),
    #[error("kernel is not Hermitian: max |K - K^dag| = {defect:.3e}")]
    NotHermitian { defect: f64 },
    #[error("trace deviates from one by {0:.3e}")]
    TraceDeviation(f64),
    #[error("kernel has negative eigenvalue {value:.3e} below tolerance")]
    NegativeEigenvalue { value: f64 },
    #[error("spectral weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("vectors are not orthonormal: Gram defect {0:.3e}")]
    GramDefect(f64),
    #[error("spectral threshold must lie in (0, 1), got {0}")]
    BadThreshold(f64),
    #[error("kernel dimension {got} does not match grid ({expected} lattice points)")]
    KernelShape { got: usize, expected: usize },
    #[error("kernel exceeds the dense-storage cap of {cap} rows (got {got})")]
    KernelTooLarge { got: usize, cap: usize },

    #[error("Wigner data integrates to {0}, expected 1 within 1e-4")]
    WignerNormalization(f64),
    #[error("phase-space array shape does not match the grid")]
    PhaseShape,

    #[error("covariance matrix must be {expected}x{expected}, got {rows}x{cols}")]
    CovarianceShape {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("covariance matrix is not symmetric: defect {0:.3e}")]
    NotSymmetric(f64),
    #[error("covariance matrix violates the uncertainty condition: min eigenvalue {0:.3e}")]
    Inadmissible(f64),
    #[error("covariance matrix too ill-conditioned: condition number {0:.3e}")]
    IllConditioned(f64),
    #[error("grid extent insufficient for the requested state: {0}")]
    GridTooSmall(String),

    #[error("rank {rank} exceeds the dimension {dim} of the purifying space")]
    RankExceedsDimension { rank: usize, dim: usize },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("file holds {got} values, expected {expected}")]
    PayloadSize { got: usize, expected: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("unexpected file kind {got:?}, expected {expected}")]
    WrongKind { got: String, expected: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;

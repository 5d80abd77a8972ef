//! Error type shared by every module of the lab.

use thiserror::Error;

/// Errors produced by constructions, transforms, and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// A distribution failed its mean-0 / variance-1 standardization checks.
    #[error("spec is not standardized: {0}")]
    RejectsNonStandardized(String),

    /// The requested tilt amplitude `c` exceeds the admissible `c_max`.
    #[error("inadmissible c = {c:.6e}: density would go negative (c_max = {c_max:.6e})")]
    RejectsInadmissibleC { c: f64, c_max: f64 },

    /// An exponential integrand left the representable range on the grid.
    #[error("quadrature overflow: {0}")]
    QuadratureOverflow(String),

    /// Laplace-transform quadrature produced a non-finite value.
    #[error("non-finite Laplace transform at t = {0}")]
    NonfiniteLaplace(f64),

    /// The Esscher tilt would overflow the exponent budget on this grid.
    #[error("tilt overflow: |h|*|x|_max = {0:.3e} exceeds the exponent budget")]
    OverflowAtTilt(f64),

    /// A lookup point lies outside the tabulated profile range.
    #[error("argument {0} outside profile range [{1}, {2}]")]
    OutOfRange(f64, f64, f64),

    /// A critical-zone precondition was violated.
    #[error("critical-zone violation: {0}")]
    ZoneViolation(String),

    /// Complex phase could not be unwrapped along the t-grid.
    #[error("phase unwrap failure near t = {0}")]
    PhaseUnwrapFailure(f64),

    /// Grid convolution detected aliasing (mass outside the padded window).
    #[error("grid too coarse: escaped mass {0:.3e} exceeds 1e-12")]
    GridTooCoarse(f64),

    /// A lifted spectral term exceeded the cancellation-safety bound.
    #[error("spectral lift overflow at harmonic {harmonic}: |term| = {magnitude:.3e} vs scale {scale:.3e}")]
    LiftOverflow {
        harmonic: i64,
        magnitude: f64,
        scale: f64,
    },

    /// The divergence integral grows at the grid edge.
    #[error("divergent integral for alpha = {0}: ratio still growing at the grid edge")]
    DivergentIntegral(f64),

    /// No analytic bound certifies the supremum beyond the grid.
    #[error("uncertified tail: grid-edge ratio still increasing and no profile supplied")]
    UncertifiedTail,

    /// The tabulated range is too small to decide the question asked.
    #[error("range too small: {0}")]
    RangeTooSmall(String),

    /// All cumulants up to the requested order are below threshold.
    #[error("all cumulants up to order {0} are zero at the working threshold")]
    AllZeroUpToJ(usize),

    /// Power-series composition left its disk of convergence.
    #[error("series divergence: |cP| reached {0:.3e} near t = 0")]
    SeriesDivergence(f64),

    /// No density route serves this spec at the requested n.
    #[error("no density method available: {0}")]
    MethodUnavailable(String),

    /// The separation property (margin > 0 for every t0) was not established.
    #[error("separation not established: {0}")]
    SeparationNotEstablished(String),

    /// The regression window is degenerate.
    #[error("ill-conditioned fit: {0}")]
    IllConditionedFit(String),

    /// Configuration document could not be parsed.
    #[error("parse error: {0}")]
    ParseError(String),

    /// Configuration parsed but violates an invariant.
    #[error("validation error: {0}")]
    ValidationError(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

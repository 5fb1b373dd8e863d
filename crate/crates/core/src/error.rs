//! Crate-wide error type.

use num_complex::Complex64;
use thiserror::Error;

/// Result alias used by every fallible operation in the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Evaluation requested at a point outside an operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Circle sample counts must be powers of two.
    #[error("sample count {0} is not a power of two")]
    SampleCount(usize),

    /// Requested truncation order does not fit the available samples.
    #[error("truncation order {order} too large for {samples} samples (need samples >= 2*(order+1))")]
    TruncationOrder { order: usize, samples: usize },

    /// A Möbius transformation was constructed with a (near-)singular matrix.
    #[error("Mobius matrix is singular: |det| = {0:.3e}")]
    SingularMobius(f64),

    /// A contour node landed on (or too close to) a singular point of the integrand.
    #[error("degenerate contour: |g(w) - z| = {0:.3e} at a quadrature node")]
    DegenerateContour(f64),

    /// Operation requires a polynomial of positive degree.
    #[error("polynomial of degree {0} is not allowed here")]
    BadDegree(usize),

    /// Eigenvalue iteration failed to deflate within the sweep budget.
    #[error("eigenvalue QR iteration did not converge (block size {0})")]
    EigenNonConvergence(usize),

    /// Newton polishing of roots hit its sweep cap; partial results attached.
    #[error("root polishing did not converge for {failed} of {total} roots")]
    RootPolish {
        failed: usize,
        total: usize,
        /// Best available roots, polished where possible.
        partial: Vec<Complex64>,
    },

    /// Zeros must sit on the real axis for CDF comparison.
    #[error("zero at {0} is off the real axis (|Im| = {1:.3e} > 1e-3)")]
    OffAxisZero(Complex64, f64),

    /// Hausdorff distance against an empty target set.
    #[error("empty target set")]
    EmptyTarget,

    /// Modular lambda requires Im(tau) > 0.
    #[error("tau = {0} is not in the upper half-plane")]
    NotInUpperHalfPlane(Complex64),

    /// The lambda function omits 0 and 1.
    #[error("value {0} is a puncture of the lambda covering")]
    LambdaPuncture(Complex64),

    /// Iterative inversion/polishing failed to meet its tolerance.
    #[error("inversion did not converge: residual {0:.3e}")]
    InversionFailure(f64),

    /// Laurent extraction failed its self-consistency residual check.
    #[error("Laurent reconstruction residual {residual:.3e} exceeds {limit:.1e}; resample with a larger radius factor or more samples")]
    LaurentResidual { residual: f64, limit: f64 },

    /// Deck-invariance verification failed; the construction is inconsistent.
    #[error("covering construction check failed: {0}")]
    CoveringCheck(String),

    /// Orbit enumeration guard.
    #[error("word length {0} exceeds the orbit enumeration cap {1}")]
    WordLengthCap(usize, usize),

    /// The pole-radius minimum did not stabilize across word lengths.
    #[error("minimal orbit modulus did not stabilize: {0:.17e} vs {1:.17e}")]
    PoleRadiusUnstable(f64, f64),

    /// Dirichlet-domain geometry came out degenerate.
    #[error("degenerate Dirichlet geometry: {0}")]
    Geometry(String),

    /// Input points are too close together or otherwise invalid.
    #[error("invalid point configuration: {0}")]
    BadConfiguration(String),

    /// Point is too close to the omitted set E.
    #[error("point {0} is within 1e-9 of the puncture set")]
    NearPuncture(Complex64),

    /// Modulus-descent reduction into the Dirichlet domain exceeded its step cap.
    #[error("Dirichlet reduction exceeded {0} steps")]
    ReductionCap(usize),

    /// JSON (de)serialization problems for the shared file schemas.
    #[error("schema error: {0}")]
    Schema(String),
}

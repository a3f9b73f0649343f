use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Two operands live on different mode counts.
    #[error("mode count mismatch: {0} vs {1}")]
    ModeMismatch(usize, usize),

    /// A structural precondition on an argument failed.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Matrix logarithm is ambiguous: an eigenangle sits too close to pi.
    #[error("matrix log branch ambiguity: eigenangle within {tol:e} of pi")]
    BranchAmbiguity { tol: f64 },

    /// Polar projection of a (numerically) singular matrix.
    #[error("rank deficiency: smallest singular value {sigma_min:e} below {tol:e}")]
    RankDeficient { sigma_min: f64, tol: f64 },

    /// A dense computation was requested above the configured qubit limit.
    #[error("dense limit exceeded: n = {n} > limit = {limit}")]
    DenseLimit { n: usize, limit: usize },

    /// A sampling distribution is inconsistent with a Gaussian oracle.
    #[error("oracle is not Gaussian: {0}")]
    NotGaussian(String),

    /// Internal consistency check failed (bug guard, not user error).
    #[error("internal consistency: {0}")]
    Inconsistency(String),

    /// The conjugation action handed to the reconstructor is far from unitary.
    #[error("inconsistent action: Choi eigenvalue gap {gap:.6} below 0.5")]
    InconsistentAction { gap: f64 },

    /// A recursive hierarchy-learning step produced an unusable estimate.
    #[error("inconsistent recursion: reconstruction residual {residual:.6}")]
    InconsistentRecursion { residual: f64 },

    /// Phase alignment has no coefficient to anchor on.
    #[error("degenerate estimate: all coefficients below {tol:e}")]
    DegenerateEstimate { tol: f64 },

    /// Membership recursion would exceed the supported depth.
    #[error("hierarchy depth {k} unsupported (max {max})")]
    DepthLimit { k: usize, max: usize },

    /// Malformed serialized input.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

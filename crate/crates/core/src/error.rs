use thiserror::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised across process specification, factorization, and fitting.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("filter transfer function vanishes near ω = {omega:.6}: |Γ(ω)| = {magnitude:.3e}")]
    TransferFunctionZero { omega: f64, magnitude: f64 },

    #[error("spectral density not positive: f({omega:.6}) = {value:.3e}")]
    NonPositiveDensity { omega: f64, value: f64 },

    #[error("AR model not stationary: characteristic root modulus {modulus:.6} ≤ 1")]
    NonStationaryAr { modulus: f64 },

    #[error("fitted AR coefficients not stationary (root modulus {modulus:.6}); refit with yule_walker")]
    NonStationaryArFit { modulus: f64 },

    #[error("autocovariance sequence indefinite: order-{order} Toeplitz minor has eigenvalue {eigenvalue:.3e}")]
    IndefiniteAcvf { order: usize, eigenvalue: f64 },

    #[error("prediction-variance breakdown at stage {stage}: ς² = {value:.3e} (indefinite autocovariance)")]
    LevinsonBreakdown { stage: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dense materialization guard exceeded: T = {dim} > {max}")]
    DimensionGuard { dim: usize, max: usize },

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("singular system while {context}")]
    SingularSystem { context: &'static str },

    #[error("imaginary residue {residue:.3e} exceeds tolerance {tol:.3e}; frequency indexing is inconsistent")]
    ImaginaryResidue { residue: f64, tol: f64 },

    #[error("residuals numerically zero: no error model identifiable")]
    DegenerateResiduals,

    #[error("replicate {replicate} (seed {seed}) failed: {source}")]
    ReplicateFailed {
        replicate: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

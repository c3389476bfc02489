use thiserror::Error;

/// Errors raised by the inference, measure and verification routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension error: expected {expected}, got {got}")]
    Dimension { expected: &'static str, got: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is singular (eigenvalue {eigenvalue:.3e}) but a negative power was requested")]
    SingularMatrix { eigenvalue: f64 },

    #[error("not a density matrix: {reason}")]
    NotDensityMatrix { reason: String },

    #[error("nonextensivity index must be positive and finite, got q = {q}")]
    QOutOfDomain { q: f64 },

    #[error("b_q = {b} outside the range 0 <= b_q <= 2*sqrt(2)")]
    BOutOfRange { b: f64 },

    #[error("sigma2_q = {sigma2} exceeds the bound sigma2_q <= 8")]
    SigmaOutOfRange { sigma2: f64 },

    #[error(
        "uncertainty relation violated: sigma2_q = {sigma2} < 2*sqrt(2)*b_q = {bound}"
    )]
    UncertaintyViolated { sigma2: f64, bound: f64 },

    #[error("Lagrange multipliers diverge on the boundary of the data domain ({reason})")]
    BoundaryDivergence { reason: &'static str },

    #[error("negative bracket {value:.6e} in the power-law state (inconsistent multipliers)")]
    NegativeBracket { value: f64 },

    #[error("mu-factors are undefined in the Shannon limit (|q - 1| < 1e-6, q = {q})")]
    ShannonLimit { q: f64 },

    #[error("reference state is singular (eigenvalue {eigenvalue:.3e}) and q' > 1")]
    SingularReference { eigenvalue: f64 },

    #[error("state has weight {leak:.3e} outside the support of the reference state")]
    SupportMismatch { leak: f64 },

    #[error("region grid has no feasible cells")]
    EmptyGrid,

    #[error("finite-difference stencil leaves the interior of the data domain at b_q = {b}, sigma2_q = {sigma2}")]
    StencilOutOfDomain { b: f64, sigma2: f64 },

    #[error("penalty search did not reach the constraints: residual {residual:.3e} after {evaluations} evaluations")]
    BudgetExhausted { residual: f64, evaluations: usize },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

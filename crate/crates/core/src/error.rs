use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("Hermitian eigensolver did not converge for a {dim}x{dim} matrix")]
    EigenNoConvergence { dim: usize },

    #[error("singular value decomposition did not converge for a {rows}x{cols} matrix")]
    SvdNoConvergence { rows: usize, cols: usize },

    #[error("function undefined at eigenvalue {eigenvalue:.6e}")]
    Domain { eigenvalue: f64 },

    #[error("matrix is rank deficient (rank {rank} of {dim})")]
    RankDeficient { rank: usize, dim: usize },

    #[error("hermitian factor precondition failed: {condition} (residual {residual:.3e})")]
    FactorCondition { condition: &'static str, residual: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("trace is {trace:.12} but must be 1 (residual {residual:.3e})")]
    Trace { trace: f64, residual: f64 },

    #[error("tangent direction is not traceless (trace {trace:.3e})")]
    NotTraceless { trace: f64 },

    #[error("channel is not trace preserving (residual {residual:.3e})")]
    NotTracePreserving { residual: f64 },

    #[error("measurement effects do not sum to identity (residual {residual:.3e})")]
    IncompleteMeasurement { residual: f64 },

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),

    #[error("invalid shape parameters: {0}")]
    InvalidShape(String),

    #[error("dimension cap exceeded: required {required}, cap {cap}")]
    DimensionCap { required: usize, cap: usize },

    #[error("supports differ: rank(rho) = {rank_rho}, rank(sigma) = {rank_sigma}, mismatch residual {residual:.3e}")]
    SupportMismatch {
        rank_rho: usize,
        rank_sigma: usize,
        residual: f64,
    },

    #[error("right logarithmic derivative does not exist: tangent leaves the support (residual {residual:.3e})")]
    RldNonexistent { residual: f64 },

    #[error("state is singular (min eigenvalue {min_eigenvalue:.3e}); restrict to its support first")]
    SingularState { min_eigenvalue: f64 },

    #[error("alpha must lie in [-3, 3], got {0}")]
    InvalidAlpha(f64),

    #[error("invalid monotone metric function: {0}")]
    InvalidMetric(String),

    #[error("Fisher information is infinite: tangent component {index} is nonzero where the distribution vanishes")]
    InfiniteFisher { index: usize },

    #[error("quadrature needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("frame vectors are numerically dependent (min Gram eigenvalue {min_eigenvalue:.3e})")]
    IllConditionedFrame { min_eigenvalue: f64 },

    #[error("threshold grid exhausted on [{lo:.6}, {hi:.6}]")]
    GridExhausted { lo: f64, hi: f64 },

    #[error("degenerate smoothing: trace of the positive part is {trace:.3e}")]
    DegenerateSmoothing { trace: f64 },

    #[error("rate {rate:.6} is infeasible; minimal feasible rate found is {minimal:.6}")]
    InfeasibleRate { rate: f64, minimal: f64 },

    #[error("gap hypothesis violated: D(rho0||sigma0) = {d_source:.6} must exceed D(rho||sigma) + 2c = {required:.6}")]
    GapViolated { d_source: f64, required: f64 },

    #[error("support condition violated: {0}")]
    SupportViolated(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

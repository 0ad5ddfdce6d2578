use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    #[error("degenerate symbol: tangential gradient {min_norm:.3e} below tolerance {tolerance:.3e} at {} direction(s)", directions.len())]
    DegenerateSymbol {
        min_norm: f64,
        tolerance: f64,
        directions: Vec<Vec<f64>>,
    },

    #[error("symbol does not satisfy hypothesis (H); run validation first")]
    HypothesisViolated,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("symbol degree must be at least 1")]
    DegreeError,

    #[error("test function width must be positive, got {0}")]
    NonPositiveWidth(f64),

    #[error("dilation factor must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("derivative order {order} exceeds cap {cap}")]
    OrderCapExceeded { order: usize, cap: usize },

    #[error("dimension {0} not supported by tensor sphere rules (cap {1})")]
    UnsupportedDimension(usize, usize),

    #[error("mollifier width {eta:.3e} exceeds eps/4 = {limit:.3e}")]
    MollifierTooWide { eta: f64, limit: f64 },

    #[error("u = {u} lies outside the smooth window [-{eps}, {eps}]")]
    OutsideSmoothWindow { u: f64, eps: f64 },

    #[error("cutoff radius {rho} is not inside the smooth window (eps = {eps})")]
    WindowTooSmall { rho: f64, eps: f64 },

    #[error("profile contains non-finite values")]
    NonfiniteProfile,

    #[error("operator case mismatch: {0}")]
    CaseMismatch(String),

    #[error("radial tail not certified: |F(R)| = {value:.3e} exceeds {tolerance:.3e}")]
    TailNotCertified { value: f64, tolerance: f64 },

    #[error("radial assembly contains a negative power r^{0}")]
    NonintegrableAssembly(i64),

    #[error("zeta = {zeta} is outside the convergence region (zeta > {abscissa})")]
    OutsideConvergenceRegion { zeta: f64, abscissa: f64 },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("Laurent fit ill-conditioned (condition {0:.3e})")]
    IllConditionedFit(f64),

    #[error("pole order {0} exceeds cap {1}")]
    PoleOrderExceeded(usize, usize),

    #[error("no convergence trend in regularized sequence")]
    NoConvergenceTrend,

    #[error("invalid configuration: {0}")]
    Config(String),
}

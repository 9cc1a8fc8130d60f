use thiserror::Error;

/// Errors raised by the Krein-space toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KreinError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("J is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("J is not an involution (residual {residual:.3e})")]
    NotFundamentalSymmetry { residual: f64 },

    #[error("J is trivial: both signs must be present (n_plus = {n_plus}, n_minus = {n_minus})")]
    TrivialSymmetry { n_plus: usize, n_minus: usize },

    #[error("basis is rank deficient (smallest/largest singular value {ratio:.3e})")]
    RankDeficient { ratio: f64 },

    #[error("not a transition operator: {0}")]
    InvalidTransition(String),

    #[error("not a maximal dual pair: {0}")]
    NotMaximalDualPair(String),

    #[error("graph block is singular: the positive subspace does not project onto H+")]
    SingularGraph,

    #[error("Q does not anticommute with J (residual {residual:.3e})")]
    GeneratorNotAnticommuting { residual: f64 },

    #[error("Q is not Hermitian (residual {residual:.3e})")]
    GeneratorNotHermitian { residual: f64 },

    #[error("not an involution (residual {residual:.3e})")]
    NotInvolution { residual: f64 },

    #[error("JC not symmetric (residual {residual:.3e})")]
    MetricNotHermitian { residual: f64 },

    #[error("JC not positive (smallest eigenvalue {min_eigenvalue:.3e})")]
    MetricNotPositive { min_eigenvalue: f64 },

    #[error("matrix is not J-self-adjoint (residual {residual:.3e})")]
    NotJSelfAdjoint { residual: f64 },

    #[error("H is not J-nonnegative (smallest eigenvalue of JH {min_eigenvalue:.3e})")]
    NotJNonnegative { min_eigenvalue: f64 },

    #[error("kernel nonempty: 0 is an eigenvalue (|lambda| = {magnitude:.3e})")]
    KernelNonempty { magnitude: f64 },

    #[error("H and C do not commute (residual {residual:.3e})")]
    NotCommuting { residual: f64 },

    #[error("no bounded C-symmetry: {0}")]
    NoCSymmetry(String),

    #[error("eigenvectors are not J-orthogonal (residual {residual:.3e})")]
    NotJOrthogonal { residual: f64 },

    #[error("neutral eigenvector: system cannot be completed")]
    NeutralEigenvector,

    #[error("eigenvector {index} has vanishing norm")]
    ZeroVector { index: usize },

    #[error("degenerate complement: no definite completion")]
    DegenerateComplement,

    #[error("eigenvectors do not span the space (rank {rank} < {dim})")]
    NotSpanning { rank: usize, dim: usize },

    #[error("parameter is not a strict contraction (norm {norm:.6})")]
    NotContraction { norm: f64 },

    #[error("parameter has shape {found:?}, expected {expected:?}")]
    ParameterShape {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("integration window {window} does not cover the spectral radius {radius}")]
    WindowTooSmall { window: f64, radius: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("matrix is singular")]
    Singular,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, KreinError>;

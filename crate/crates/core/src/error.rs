use thiserror::Error;

/// Errors raised by the curvature engine.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("matrix is not special orthogonal (‖gᵀg − I‖∞ = {residual:.3e}, det = {det:.6})")]
    NotOrthogonal { residual: f64, det: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ill-conditioned {what}: condition number {cond:.3e} exceeds 1e12")]
    IllConditioned { what: &'static str, cond: f64 },

    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),

    #[error("subspace check failed: {what} (residual {residual:.3e})")]
    NotClosed { what: String, residual: f64 },

    #[error("degenerate plane: Gram determinant {gram:.3e} ≤ 1e-12")]
    DegeneratePlane { gram: f64 },

    #[error("genericity unreachable after {attempts} resamples")]
    GenericityUnreachable { attempts: usize },

    #[error("bundle is fat (deficit {deficit:.6e}); no commuting witness exists")]
    NoWitness { deficit: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("gradient ascent failed to converge (best residual {best_residual:.3e})")]
    ConvergenceFailure { best_residual: f64 },

    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(String),
}

pub type Result<T> = std::result::Result<T, Error>;

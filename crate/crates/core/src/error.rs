use thiserror::Error;

/// Errors raised by the design, simulation and synthesis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix R is not symmetric (max |R - R^T| = {residual:e})")]
    NonSymmetric { residual: f64 },

    #[error("kappa must be positive (got {0})")]
    NonPositiveKappa(f64),

    #[error("omega_o must be non-negative (got {0})")]
    NegativeDetuning(f64),

    #[error("C_p must be non-zero")]
    ZeroOutputRow,

    #[error("observer drift is singular")]
    SingularDrift,

    #[error("drift is not Hurwitz")]
    NotHurwitz,

    #[error("plant unobservable: e = 0")]
    Unobservable,

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("time step {dt} violates the stability guard dt <= {limit}")]
    StepGuard { dt: f64, limit: f64 },

    #[error("non-finite state in trajectory {trajectory} at step {step}")]
    NonFinite { trajectory: usize, step: usize },

    #[error("estimation window is empty: {0}")]
    EmptyWindow(String),

    #[error("epsilon must be non-zero")]
    ZeroSqueezing,

    #[error("beamsplitter is singular: cos(theta) = 1")]
    SingularBeamsplitter,

    #[error("theta grid point {0} lies outside (0, 2*pi)")]
    GridSingularity(f64),

    #[error("matrix is not in doubled-up form (residual {residual:e})")]
    NotDoubledUp { residual: f64 },

    #[error("quadrature Hamiltonian has imaginary residue {residual:e}")]
    ImaginaryResidue { residual: f64 },

    #[error("rank-one condition violated: ||delta|^2 - |epsilon|^2| = {residual:e}")]
    RankCondition { residual: f64 },

    #[error("coupling matrix is zero")]
    ZeroCoupling,

    #[error("{0} must be positive")]
    NonPositive(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

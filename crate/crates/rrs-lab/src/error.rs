use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced anywhere in the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("coupling constant chi must be nonzero")]
    ZeroCoupling,

    #[error("particle count must be at least 1, got {0}")]
    InvalidParticleCount(usize),

    #[error("{name} must be positive, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },

    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinates must be strictly decreasing: q[{index}] = {value} is not above q[{next_index}] = {next}")]
    UnorderedConfiguration {
        index: usize,
        value: f64,
        next_index: usize,
        next: f64,
    },

    #[error("singular configuration: minimum gap {min_gap:.6e} is below the floor {gap_floor:.6e}")]
    SingularConfiguration { min_gap: f64, gap_floor: f64 },

    #[error("non-finite phase-space value at coordinate {index}")]
    NonFiniteCoordinate { index: usize },

    #[error("trace has normalized imaginary residue {residue:.6e} above tolerance {tol:.6e}")]
    ImaginaryResidue { residue: f64, tol: f64 },

    #[error("matrix is numerically singular (pivot {pivot:.6e} at elimination step {step})")]
    SingularMatrix { pivot: f64, step: usize },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {offdiag:.6e})")]
    EigenNonConvergence { sweeps: usize, offdiag: f64 },

    #[error("non-finite derivative of {observable} with respect to coordinate {index}")]
    NonFiniteDerivative { observable: String, index: usize },

    #[error("observable index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("unknown observable id {0:?}")]
    UnknownObservable(String),

    #[error("flow generator must be a function of the commuting invariants, got {0}")]
    InvalidFlowGenerator(String),

    #[error("collision at t = {time:.6}: minimum gap {min_gap:.6e} fell below the floor {gap_floor:.6e}")]
    Collision {
        time: f64,
        min_gap: f64,
        gap_floor: f64,
    },

    #[error("step size underflow at t = {time:.6} (h = {step:.6e}); the flow appears stiff")]
    StepUnderflow { time: f64, step: f64 },

    #[error("integration exceeded the step budget of {0}")]
    StepBudgetExceeded(usize),

    #[error("asymptotic separation not reached: final minimum gap {min_gap:.4} is below the required {required:.4}; extend the horizon")]
    NeedsLongerHorizon { min_gap: f64, required: f64 },

    #[error("asymptotic momenta are not strictly decreasing: {0:?}")]
    UnorderedAsymptotics(Vec<f64>),

    #[error("least-squares fit is degenerate: {0}")]
    DegenerateFit(&'static str),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

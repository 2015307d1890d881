use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field has {got} cells but grid has {expected}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("negative values in field `{field}` (min = {min:.6e})")]
    NegativeField { field: &'static str, min: f64 },

    #[error("singular system: sigma = 0 with nonzero-mean right-hand side")]
    SingularSystem,

    #[error(
        "linear solver did not converge after {iterations} iterations \
         (relative residual {residual:.3e})"
    )]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("exponential overflow guard: max field value {max_w:.3} exceeds {limit}")]
    Overflow { max_w: f64, limit: f64 },

    #[error(
        "grid too coarse for eta = {eta}: cell size {h:.4e} exceeds eta/8 = {required:.4e} \
         (need >= {required_cells} cells per direction)"
    )]
    UnderResolved {
        eta: f64,
        h: f64,
        required: f64,
        required_cells: usize,
    },

    #[error(
        "bubble construction infeasible: U_eta = {u_mass:.6} <= 0 at eta = {eta} \
         (total mass too small for the requested concentration)"
    )]
    MassInfeasible { eta: f64, u_mass: f64 },

    #[error("eta list must be strictly decreasing within (0, 1)")]
    NonDescendingEtas,

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code: 2 for configuration problems, 3 for solver failures,
    /// 4 for violated invariants.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidParameter(_)
            | Error::NonDescendingEtas
            | Error::UnderResolved { .. }
            | Error::MassInfeasible { .. } => 2,
            Error::InvariantViolation(_) => 4,
            _ => 3,
        }
    }
}

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected x-len {expected_x} and y-len {expected_y}, got {got_x} and {got_y}")]
    DimensionMismatch {
        expected_x: usize,
        expected_y: usize,
        got_x: usize,
        got_y: usize,
    },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dilation factor must be positive, got {0}")]
    NonPositiveLambda(f64),

    #[error("finite-difference step {step} too large for distance {dist} from the degenerate set")]
    StepTooLarge { step: f64, dist: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("Hardy constant formula inapplicable: Q - p + alpha*p = {0} <= 0")]
    ConstantInapplicable(f64),

    #[error("balance equation is degenerate in the free parameter {0}")]
    DegenerateBalance(&'static str),

    #[error("integrand is not bi-radial; only bi-radial integrands are supported by this route")]
    NotBiRadial,

    #[error("field support is unbounded; quadrature requires compact support")]
    UnboundedSupport,

    #[error("integral diverges ({0})")]
    Divergent(String),

    #[error("quadrature did not converge within the evaluation budget (estimate {estimate:.3e} of value {value:.3e} after {n_evals} evaluations)")]
    NonConvergence {
        value: f64,
        estimate: f64,
        n_evals: usize,
    },

    #[error("integrability pre-check failed: {0}")]
    IntegrabilityPrecheck(String),

    #[error("parameter tuple is inadmissible: {0} (pass force=true for violation experiments)")]
    Inadmissible(String),

    #[error("fit inconclusive: {0}")]
    InconclusiveFit(String),

    #[error("grid is inadequate: {0}")]
    BadGrid(String),

    #[error("optimizer budget exhausted before stabilization")]
    BudgetExhausted,
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid needs at least 3 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("grid bounds must satisfy xmax > xmin (got [{xmin}, {xmax}])")]
    EmptyInterval { xmin: f64, xmax: f64 },
    #[error("period must be positive (got {0})")]
    NonPositivePeriod(f64),
    #[error("coefficient sample at node {0} is not finite")]
    NonFiniteSample(usize),
    #[error("nonlinearity must be positive (g_min = {0})")]
    NonPositiveNonlinearity(f64),
    #[error("lambda must be negative (got {0})")]
    LambdaNotNegative(f64),
    #[error("lambda must be below min V (lambda = {lambda}, min V = {min_v})")]
    LambdaNotBelowMinV { lambda: f64, min_v: f64 },
    #[error("grid step {step} does not divide the period {period}")]
    Incommensurate { period: f64, step: f64 },
    #[error("grids are not node-aligned")]
    GridMismatch,
    #[error("invalid option: {0}")]
    InvalidOption(&'static str),
    #[error("background must be positive at every node (node {0})")]
    NonPositiveBackground(usize),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("iterates left the bracket more than once (iteration {0})")]
    BracketViolation(usize),
    #[error("line search failed after 60 halvings")]
    LineSearchFailure,
    #[error("converged profile is not nondecreasing (min increment {0:e})")]
    MonotonicityLoss(f64),
    #[error("linearization is singular or indefinite")]
    SingularLinearization,
    #[error("singular linear system at row {0}")]
    SingularMatrix(usize),
    #[error("profile has no sign change")]
    NoSignChange,
    #[error("tail difference below floor on the whole fit window")]
    TailUnderflow,
    #[error("phase undefined: modulus vanishes at the reference node")]
    PhaseUndefined,
    #[error("not enough data: {0}")]
    InsufficientData(&'static str),
    #[error("nonlinear correction failed to contract at step {0}")]
    StepDivergence(usize),
}

/// Coarse classification used by front ends to choose exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    NonConvergence,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            TooFewNodes(_)
            | EmptyInterval { .. }
            | NonPositivePeriod(_)
            | NonFiniteSample(_)
            | NonPositiveNonlinearity(_)
            | LambdaNotNegative(_)
            | LambdaNotBelowMinV { .. }
            | Incommensurate { .. }
            | GridMismatch
            | InvalidOption(_)
            | InsufficientData(_) => ErrorClass::Validation,
            NonConvergence { .. }
            | BracketViolation(_)
            | LineSearchFailure
            | StepDivergence(_)
            | SingularLinearization => ErrorClass::NonConvergence,
            _ => ErrorClass::Numerical,
        }
    }
}

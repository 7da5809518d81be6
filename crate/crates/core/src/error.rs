use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {field}: expected {expected}, found {found}")]
    ShapeMismatch {
        field: String,
        expected: String,
        found: String,
    },

    #[error("non-finite value in {field}")]
    NonFinite { field: String },

    #[error("parameter {field} must be {requirement}, got {value}")]
    NonPositiveParameter {
        field: String,
        requirement: &'static str,
        value: f64,
    },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("covariance trace {trace} exceeds power budget {budget} for user {user}")]
    PowerBudgetExceeded { user: usize, trace: f64, budget: f64 },

    #[error("user index {index} out of range for {users} users")]
    IndexOutOfRange { index: usize, users: usize },

    #[error("interference-plus-noise covariance is singular")]
    SingularNoiseCovariance,

    #[error("matrix is singular: {context}")]
    SingularMatrix { context: &'static str },

    #[error("operation requires {required}, system has Nt={nt}, Nr={nr}")]
    WrongDimensions {
        required: &'static str,
        nt: usize,
        nr: usize,
    },

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("boundary has {found} points, at least {required} required")]
    TooFewPoints { found: usize, required: usize },

    #[error("solver did not converge: {0}")]
    NotConverged(String),

    #[error("ray with slope {slope} does not intersect the sampled boundary")]
    NoIntersection { slope: f64 },

    #[error("optimal utility of user {user} is not positive")]
    ZeroOptimalUtility { user: usize },

    #[error("direct channel of user {user} is singular or ill-conditioned (condition number {condition:e})")]
    SingularDirectChannel { user: usize, condition: f64 },

    #[error("combined stage channel for user {user} is singular")]
    SingularCombinedChannel { user: usize },

    #[error("unsupported interference-cancellation stage {0}; expected 1, 2 or 3")]
    UnsupportedStage(usize),

    #[error("path point leaves the bargaining set (T_{user} = {value})")]
    OutsideBargainingSet { user: usize, value: f64 },

    #[error("failed to parse scenario {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("scenario {path} failed validation: {source}")]
    Validation {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameters admit no real horizon (a + b >= r_s): {0}")]
    NakedSingularity(String),
    #[error("coordinate singularity: {0}")]
    CoordinateSingularity(String),
    #[error("ingoing chart construction failed at r = {r}: {reason}")]
    ChartConstructionFailure { r: f64, reason: String },
    #[error("invalid constants of motion: {0}")]
    InvalidConstants(String),
    #[error("no trapped sphere: {0}")]
    NoTrappedSphere(String),
    #[error("finite-difference oracle failed: {0}")]
    OracleFailure(String),
    #[error("no root of R in the admissible cone: {0}")]
    NoRoot(String),
    #[error("complex tau roots at r = {r}")]
    ComplexRoots { r: f64 },
    #[error("profile construction failed: {0}")]
    ProfileConstructionFailure(String),
    #[error("derivative accuracy check failed: {0}")]
    DifferentiationError(String),
    #[error("redshift budget failure at r = {r}: n = {n}")]
    RedshiftBudgetFailure { r: f64, n: f64 },
    #[error("quadratic form not positive: c_star = {c_star} at r = {r}, eigenvector {eigvec:?}")]
    LemmaViolation { c_star: f64, r: f64, eigvec: Vec<f64> },
    #[error("boundary form not equivalent to energy: {0}")]
    BoundaryFormFailure(String),
    #[error("nu = {nu} outside (0,1) at r = {r}")]
    NuRangeViolation { nu: f64, r: f64 },
    #[error("symbol positivity violated: {0}")]
    PositivityViolation(String),
    #[error("admissible band for C is empty: [{lo}, {hi}]")]
    CBandEmpty { lo: f64, hi: f64 },
    #[error("lower bound violated: kappa = {kappa} at {witness:?}")]
    LowerBoundViolation { kappa: f64, witness: Vec<f64> },
    #[error("wave operator assembly failed: {0}")]
    AssemblyError(String),
    #[error("numerical instability at step {step}: {reason}")]
    InstabilityError { step: usize, reason: String },
    #[error("inconclusive convergence: {0}")]
    InconclusiveConvergence(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o failure at {path}: {reason}")]
    Io { path: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

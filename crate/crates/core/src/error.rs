use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("component mismatch: expected {expected}, got {got}")]
    ComponentMismatch { expected: usize, got: usize },
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("field has nonzero mean {0:e}; negative-order multiplier needs zero mean")]
    NonzeroMean(f64),
    #[error("alias-exactness violated: M = {m} but {needed} required for K_max = {k_max}")]
    AliasViolation { m: usize, needed: usize, k_max: usize },
    #[error("field has energy {0:e} outside the retained mode set")]
    SupportViolation(f64),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
    #[error("blow-up guard tripped at t = {t}: |b| = {norm:e} > {limit:e}")]
    BlowUp { t: f64, norm: f64, limit: f64 },
    #[error("CFL violated at t = {t}: dt = {dt:e} > {limit:e}")]
    Cfl { t: f64, dt: f64, limit: f64 },
    #[error("kernel evaluated at the origin")]
    Singular,
    #[error("line integral along axis {axis} is {residual:e}, not zero")]
    LineIntegral { axis: usize, residual: f64 },
    #[error("weight along axis {axis} has mass {mass}, not 1")]
    WeightMass { axis: usize, mass: f64 },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("index relation violated: {0}")]
    IndexRelation(String),
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("malformed snapshot: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

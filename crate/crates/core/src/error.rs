use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid quadrature rule: {0}")]
    InvalidQuadrature(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("non-finite value {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },
    #[error("x = {x} lies outside [{a}, {b}]")]
    OutOfDomain { x: f64, a: f64, b: f64 },
    #[error("fields live on different meshes")]
    MeshMismatch,
    #[error("invalid problem data: {0}")]
    InvalidData(String),
    #[error("perturbation radius {epsilon} must be positive and below min gamma0 = {min_gamma0}")]
    EpsilonOutOfRange { epsilon: f64, min_gamma0: f64 },
    #[error("dual field is not equilibrated: |-y' + f| = {residual:e} at x = {x}")]
    NotEquilibrated { x: f64, residual: f64 },
    #[error("system matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("invalid study: {0}")]
    InvalidStudy(String),
}

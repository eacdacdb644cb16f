use crate::levy::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(ValidationReport),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid solver config: {0}")]
    InvalidConfig(String),

    #[error("CFL guard violated: dt * (lambda_tilde + a) = {value:.6} > {limit}")]
    Cfl { value: f64, limit: f64 },

    #[error("tridiagonal system is not diagonally dominant at row {row}")]
    NotDiagonallyDominant { row: usize },

    #[error("jump measure is empty")]
    EmptyJumps,

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

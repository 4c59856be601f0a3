use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("all lag weights are zero")]
    EmptyWeights,
    #[error("zero mainlobe, PSL undefined")]
    ZeroMainlobe,
    #[error("peak sidelobe is zero")]
    ZeroSidelobe,
    #[error("matrix is not symmetric (deviation {0:e})")]
    NotSymmetric(f64),
    #[error("Jacobi sweep did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("problem too large for dense oracle: {0}")]
    TooLarge(String),
    #[error("channel matrix is rank deficient")]
    RankDeficient,
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

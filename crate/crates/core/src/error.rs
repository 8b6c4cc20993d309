use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("point violates the manifold constraint (residual {residual:.3e})")]
    InvalidPoint { residual: f64 },
    #[error("point lies on the lower sheet of the hyperboloid")]
    WrongSheet,
    #[error("logarithm undefined: points are antipodal")]
    UndefinedLog,
    #[error("parallel transport undefined: endpoints are antipodal")]
    UndefinedTransport,
    #[error("argument outside the map domain: {0}")]
    OutOfDomain(String),
    #[error("truncation infeasible: acceptance probability {0:.3e} below 1e-6")]
    TruncationInfeasible(f64),
    #[error("grid has {0} points, above the 1e7 guard")]
    GridTooLarge(usize),
    #[error("degenerate mixture: {0}")]
    DegenerateMixture(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("welfare gradient is zero; the welfare constraint is vacuous")]
    ZeroWelfareGradient,
    #[error("effective curvature is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    SingularCurvature { min_eigenvalue: f64 },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },
    #[error("curvature matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("coalition reward is not aligned with welfare (u'r_C = {alignment:e})")]
    NotAligned { alignment: f64 },
    #[error("baseline welfare must be positive (got {0})")]
    NonpositiveBaseline(f64),
    #[error("trim count {k} too large for {n} signals")]
    TrimTooLarge { k: usize, n: usize },
    #[error("aggregator has {weights} weights but {n} signals")]
    WeightDimensionMismatch { weights: usize, n: usize },
    #[error("noise covariance is not positive definite")]
    SingularCovariance,
    #[error("noncentrality must be positive (got {0})")]
    ZeroNoncentrality(f64),
    #[error("candidate index {index} out of range for {len} candidates")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("candidate {0} is already selected")]
    AlreadySelected(usize),
    #[error("exhaustive search supports at most {max} candidates (got {m})")]
    TooLarge { m: usize, max: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

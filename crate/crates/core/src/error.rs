use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("degree {degree} exceeds the enumeration cap {cap}")]
    LimitExceeded { degree: usize, cap: usize },
    #[error("space mismatch: {0}")]
    SpaceMismatch(String),
    #[error("bad constant term: {0}")]
    BadConstantTerm(String),
    #[error("linear solve failed: {0}")]
    SolveFailure(String),
    #[error("not of perturbed Gaussian form: {0}")]
    NotGaussianForm(String),
    #[error("covariance matrix is singular")]
    SingularCovariance,
    #[error("element is not invertible: {0}")]
    NonInvertibleUnit(String),
    #[error("invalid Lie algebra data: {0}")]
    BadLieData(String),
    #[error("unsupported diagram: {0}")]
    UnsupportedDiagram(String),
    #[error("parse error at line {line}: expected {expected}")]
    Parse { line: usize, expected: String },
    #[error("format version mismatch: found {found}, supported {supported}")]
    VersionMismatch { found: String, supported: String },
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn parse(line: usize, expected: impl Into<String>) -> Self {
        Error::Parse { line, expected: expected.into() }
    }

    /// True for failures caused by malformed input text rather than by
    /// the mathematics of the input.
    pub fn is_parse_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::VersionMismatch { .. } | Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

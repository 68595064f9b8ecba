use thiserror::Error;

/// Why an angular problem has no admissible profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum NotSolvableReason {
    /// The right-hand side has a nonzero component on the kernel `cos 2θ, sin 2θ`.
    KernelObstruction,
    /// The kernel coefficients cannot satisfy the requested boundary values.
    BoundaryMismatch,
}

impl std::fmt::Display for NotSolvableReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::KernelObstruction => f.write_str("KernelObstruction"),
            Self::BoundaryMismatch => f.write_str("BoundaryMismatch"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("angular velocity {0} outside the admissible range (0, 1/2)")]
    InvalidOmega(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("computational box too small: {0}")]
    DomainTooSmall(String),
    #[error("point ({0}, {1}) outside the interpolation domain")]
    OutOfDomain(f64, f64),
    #[error("unknown synthetic expression `{0}`")]
    UnknownExpression(String),
    #[error("invalid test field: {0}")]
    InvalidTestField(String),
    #[error("degenerate normalization: {0}")]
    DegenerateNormalization(String),
    #[error("no corner evidence: {0}")]
    NoCornerEvidence(String),
    #[error("not solvable: {0}")]
    NotSolvable(NotSolvableReason),
    #[error("invalid constraints: {0}")]
    InvalidConstraints(String),
    #[error("invalid fold number {0}")]
    InvalidFold(usize),
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    MaxIterExceeded { iterations: usize, residual: f64 },
    #[error("jacobian is singular")]
    JacobianSingular,
    #[error("boundary self-intersects or reaches the center")]
    SelfIntersection,
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical procedure on valid input, as opposed to
    /// rejected input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Self::NotSolvable(_)
                | Self::NoRoot(_)
                | Self::MaxIterExceeded { .. }
                | Self::JacobianSingular
                | Self::SelfIntersection
                | Self::DegenerateNormalization(_)
                | Self::NoCornerEvidence(_)
        )
    }

    /// Short machine-readable tag.
    pub fn reason(&self) -> String {
        match self {
            Self::InvalidGeometry(_) => "InvalidGeometry".into(),
            Self::InvalidOmega(_) => "InvalidOmega".into(),
            Self::InvalidParameter(_) => "InvalidParameter".into(),
            Self::DomainTooSmall(_) => "DomainTooSmall".into(),
            Self::OutOfDomain(..) => "OutOfDomain".into(),
            Self::UnknownExpression(_) => "UnknownExpression".into(),
            Self::InvalidTestField(_) => "InvalidTestField".into(),
            Self::DegenerateNormalization(_) => "DegenerateNormalization".into(),
            Self::NoCornerEvidence(_) => "NoCornerEvidence".into(),
            Self::NotSolvable(r) => r.to_string(),
            Self::InvalidConstraints(_) => "InvalidConstraints".into(),
            Self::InvalidFold(_) => "InvalidFold".into(),
            Self::NoRoot(_) => "NoRoot".into(),
            Self::MaxIterExceeded { .. } => "MaxIterExceeded".into(),
            Self::JacobianSingular => "JacobianSingular".into(),
            Self::SelfIntersection => "SelfIntersection".into(),
            Self::Io(_) => "Io".into(),
            Self::Json(_) => "Json".into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("state space of dimension {0} exceeds the supported maximum {1}")]
    DimensionCapExceeded(usize, usize),
    #[error("wire {wire} out of range for a {n_wires}-wire circuit")]
    WireOutOfRange { wire: usize, n_wires: usize },
    #[error("instruction wires must be distinct")]
    DuplicateWires,
    #[error("gate {gate} takes {expected} wire(s), got {got}")]
    WrongArity {
        gate: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("gate {0} is only defined for dimension {1}")]
    UnsupportedDimension(&'static str, usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("state vector is not normalized (|norm^2 - 1| = {0:.3e})")]
    NotNormalized(f64),
    #[error("register {0} is written more than once")]
    RegisterReuse(String),
    #[error("register {0} is read before any measurement writes it")]
    RegisterUnset(String),
    #[error("invalid register name {0:?}")]
    InvalidRegisterName(String),
    #[error("basis label {label} out of range for dimension {d}")]
    LabelOutOfRange { label: usize, d: usize },
    #[error("circuit contains measurements or register-controlled gates; a pure unitary was requested")]
    MeasurementPresent,
    #[error("selected measurement branch has vanishing probability ({0:.3e})")]
    ProbabilityUnderflow(f64),
    #[error("forced outcome stream exhausted")]
    OutcomeExhausted,
    #[error("outcome {outcome} out of range for dimension {d}")]
    OutcomeOutOfRange { outcome: usize, d: usize },
    #[error("rule {rule} does not apply at {site}: {reason}")]
    RuleMismatch {
        rule: &'static str,
        site: String,
        reason: String,
    },
    #[error("rewrite side condition failed: {0}")]
    SideCondition(String),
    #[error("instruction index {index} out of range ({len} instructions)")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("{0}")]
    Parse(#[from] crate::textfmt::ParseError),
}

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("index {index} out of range for n = {n} (valid: 2..={n})")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("fibration dimension n = {0} unsupported (need 2 <= n <= 9)")]
    UnsupportedDimension(usize),

    #[error("Fourier mode {mode} exceeds cap {cap}")]
    ModeOverflow { mode: i64, cap: u32 },

    #[error("polynomial degree {degree} exceeds cap {cap}")]
    DegreeOverflow { degree: u64, cap: u32 },

    #[error("coefficients violate the reality condition (residual {0:e})")]
    NotReal(f64),

    #[error("section is not fibrewise closed (order {order}, slot ({j},{l}), max |coef| {size:e})")]
    NotClosed {
        order: usize,
        j: usize,
        l: usize,
        size: f64,
    },

    #[error("cycle integral over db_{j} is {value}, not an integer")]
    NotIntegral { j: usize, value: f64 },

    #[error("cycle integral over db_{j} depends on the base point")]
    NotConstant { j: usize },

    #[error("order {order} out of range (sequence order {max})")]
    OrderOutOfRange { order: usize, max: usize },

    #[error("germ orders differ: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("Newton iteration diverged at {point:?}")]
    NewtonDivergence { point: Vec<f64> },

    #[error("no certified domain down to eps = {eps:e}")]
    DomainTooLarge { eps: f64 },

    #[error("flow integration diverged: {0}")]
    FlowDivergence(String),

    #[error("return-time search failed: {0}")]
    ReturnSearchFailed(String),

    #[error("energy drift {drift:e} exceeds {limit:e} per unit time")]
    DriftExceeded { drift: f64, limit: f64 },

    #[error("function undefined at point: {0}")]
    UndefinedAtPoint(String),

    #[error("singular point: {0}")]
    SingularPoint(String),

    #[error("continuation lost: {0}")]
    ContinuationLost(String),

    #[error("unknown example '{0}'")]
    UnknownName(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

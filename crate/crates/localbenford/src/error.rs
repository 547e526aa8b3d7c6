use thiserror::Error;

/// Library-wide error type. The CLI maps these onto process exit codes via
/// [`Error::exit_code`]: 2 for invalid input, 3 for precision/depth refusals,
/// 4 for internal invariant violations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error(
        "precision budget exceeded for {family} at n = {n}: \
         accumulated bound 2^{bound_log2:.1} exceeds 2^-{budget_bits}"
    )]
    PrecisionBudget {
        family: &'static str,
        n: u64,
        bound_log2: f64,
        budget_bits: u32,
    },

    #[error("requested evaluation needs {needed} working bits, above the ceiling of {ceiling}")]
    DepthExceeded { needed: u64, ceiling: u64 },

    #[error("{family} is not seekable without replay or a checkpoint")]
    NotSeekable { family: &'static str },

    #[error("unsupported range for {family}: {msg}")]
    UnsupportedRange { family: &'static str, msg: String },

    #[error("n = {n} exceeds the configured maximum {max} for {what}")]
    ExceedsMaximum { what: &'static str, n: u64, max: u64 },

    #[error("insufficient N: {msg}")]
    InsufficientN { msg: String },

    #[error("counter shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("digit {digit} out of range for base {base}")]
    DigitOutOfRange { digit: u32, base: u32 },

    #[error("integer vector t must not be all zero")]
    ZeroVector,

    #[error(
        "cancellation overflow: certified bound 2^{bound_log2:.1} \
         still exceeds the tolerance at {bits} working bits"
    )]
    CancellationOverflow { bound_log2: f64, bits: u32 },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            InvalidInput(_) | Parse { .. } | ShapeMismatch(_) | EmptyInput(_)
            | DigitOutOfRange { .. } | ZeroVector => 2,
            PrecisionBudget { .. } | DepthExceeded { .. } | NotSeekable { .. }
            | UnsupportedRange { .. } | ExceedsMaximum { .. } | InsufficientN { .. }
            | CancellationOverflow { .. } | Checkpoint(_) | Io(_) => 3,
            Internal(_) => 4,
        }
    }
}

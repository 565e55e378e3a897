use thiserror::Error;

/// Everything that can go wrong in the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("density matrix check failed: {0}")]
    InvalidState(String),

    #[error("mean spin vanished (|<J>| = {norm:e}); squeezing parameter undefined")]
    MeanSpinVanished { norm: f64 },

    #[error("expectation value has imaginary residue {residue:e}")]
    ImaginaryResidue { residue: f64 },

    #[error("closed-form {what} disagrees with quadrature: {closed_form} vs {quadrature}")]
    QuadratureMismatch {
        what: &'static str,
        closed_form: f64,
        quadrature: f64,
    },

    #[error("adaptive quadrature did not converge: estimate {estimate}, error {error:e}")]
    QuadratureNotConverged { estimate: f64, error: f64 },

    #[error("time {tau} outside [0, {t_total})")]
    TimeOutOfRange { tau: f64, t_total: f64 },

    #[error("no interior minimum of the squeezing curve on (0, {gt_max}]")]
    NoInteriorMinimum { gt_max: f64 },

    #[error("composite dimension {dim} exceeds the oracle limit {limit}")]
    DimensionOverflow { dim: usize, limit: usize },

    #[error("Fock truncation n_max={n_max} below required floor {floor}")]
    TruncationTooSmall { n_max: usize, floor: usize },

    #[error("{what} not converged: relative change {change:e} exceeds {tolerance:e}")]
    NotConverged {
        what: &'static str,
        change: f64,
        tolerance: f64,
    },

    #[error("trace drifted to {trace} at t={t}")]
    TraceDrift { trace: f64, t: f64 },

    #[error("phase increment {increment} rad too large to unwrap for element ({m},{n})")]
    PhaseUnwrapAmbiguity { m: i64, n: i64, increment: f64 },

    #[error("config line {line}: key `{key}`: {reason}")]
    Config {
        line: usize,
        key: String,
        reason: String,
    },

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Configuration problems (exit status 1) versus numerical failures (exit status 2).
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::InvalidParameter { .. })
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Which half-line an operator reads from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Side {
    Right,
    Left,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Right => 1.0,
            Side::Left => -1.0,
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Right => write!(f, "right"),
            Side::Left => write!(f, "left"),
        }
    }
}

impl std::str::FromStr for Side {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "right" => Ok(Side::Right),
            "left" => Ok(Side::Left),
            other => Err(format!("expected \"right\" or \"left\", got {other:?}")),
        }
    }
}

#[derive(Debug, Error)]
pub enum FracError {
    #[error("fractional order must lie strictly inside (0, 1), got {0}")]
    InvalidOrder(f64),
    #[error("truncation length must be at least {min}, got {got}")]
    TruncationTooShort { min: usize, got: usize },
    #[error("mesh step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("window [{n_lo}, {n_hi}] is empty or too small (need at least {min} points)")]
    InvalidWindow { n_lo: i64, n_hi: i64, min: usize },
    #[error("invalid parameter {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("{side} tail is not summable for p = {p}")]
    NonSummableTail { side: Side, p: f64 },
    #[error("{side} tail has no declared bound")]
    UnboundedTail { side: Side },
    #[error("{side} tail is not declared decaying; the inverse-power sum needs a decaying ray")]
    NonDecayingTail { side: Side },
    #[error("series did not settle within {max_terms} terms")]
    SeriesNonConvergence { max_terms: usize },
    #[error("quadrature failed to reach tolerance {tol:e} (best error estimate {best:e})")]
    QuadratureNonConvergence { tol: f64, best: f64 },
    #[error("kernel mass deficit {deficit:e} still above tolerance {tol:e} at the term cap")]
    MassDeficitUnreachable { deficit: f64, tol: f64 },
    #[error("maximum-principle hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("order {alpha} is not below the Hölder exponent {beta}")]
    OrderExceedsSmoothness { alpha: f64, beta: f64 },
    #[error("unknown test function {0:?}")]
    UnknownFunction(String),
    #[error("missing derivative for test function {0:?}")]
    MissingDerivative(String),
    #[error("degenerate fit input: {0}")]
    DegenerateFit(String),
    #[error("solver residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("extrapolation failed to stabilize (levels {0:e} then {1:e})")]
    ExtrapolationDiverged(f64, f64),
    #[error("tail model cannot be serialized (unnamed callback)")]
    UnserializableTail,
    #[error("malformed grid file: {0}")]
    MalformedGridFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FracError>;

impl FracError {
    /// True for errors that indicate bad input rather than a numerical breakdown.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            FracError::SeriesNonConvergence { .. }
                | FracError::QuadratureNonConvergence { .. }
                | FracError::MassDeficitUnreachable { .. }
                | FracError::ResidualTooLarge { .. }
                | FracError::ExtrapolationDiverged(..)
                | FracError::DegenerateFit(..)
                | FracError::Io(..)
        )
    }
}

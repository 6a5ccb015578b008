use thiserror::Error;

/// Errors raised by the analytic chain, the grid oracle and scenario handling.
#[derive(Debug, Error)]
pub enum PopperError {
    /// An input lies outside the physical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A scenario or command configuration is invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// The grid is too coarse or too small for the requested computation.
    #[error("resolution error: {reason} (need extent >= {required_extent_mm:.4} mm, step <= {required_step_mm:.5} mm)")]
    Resolution {
        reason: String,
        required_extent_mm: f64,
        required_step_mm: f64,
    },

    /// Conditioning on an aperture that (numerically) never transmits.
    #[error("degenerate conditioning: coincidence weight {weight:e} below threshold")]
    DegenerateConditioning { weight: f64 },

    /// A projective measurement outcome with zero probability.
    #[error("impossible outcome: {0}")]
    ImpossibleOutcome(String),

    /// Width inversion with no real solution at the given distance.
    #[error("unreachable width: observed width {width_mm} mm is below the minimum {min_width_mm} mm reachable over this distance")]
    UnreachableWidth { width_mm: f64, min_width_mm: f64 },

    /// Width inversion produced a localization narrower than the slit itself.
    #[error("slit wider than observed localization: s = {s_mm} mm < epsilon = {epsilon_mm} mm")]
    SlitWiderThanLocalization { s_mm: f64, epsilon_mm: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed scenario: {0}")]
    Json(#[from] serde_json::Error),
}

impl PopperError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        PopperError::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        PopperError::Config(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            PopperError::Resolution { .. } | PopperError::DegenerateConditioning { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, PopperError>;

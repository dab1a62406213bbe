use thiserror::Error;

/// Errors raised while evaluating scenes, geometry and integrals.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum TransportError {
    #[error("evaluation failure in {what}: {detail}")]
    EvaluationFailure { what: String, detail: String },

    #[error("rank deficient differential (gram determinant {gram_det:e} <= {tol:e})")]
    RankDeficient { gram_det: f64, tol: f64 },

    #[error("exterior normal orientation is ambiguous at {point:?} (both probes {state})")]
    OrientationAmbiguous { point: Vec<f64>, state: &'static str },

    #[error("nearest-point search did not converge (distance {distance:e} > {tol:e})")]
    MatchFailure { distance: f64, tol: f64 },

    #[error("no integration path: domain has neither a bulk parametrization nor a membership chart")]
    NoIntegrationPath,

    #[error("stencil [{lo}, {hi}] leaves the time window [{window_min}, {window_max}]")]
    WindowExceeded {
        lo: f64,
        hi: f64,
        window_min: f64,
        window_max: f64,
    },

    #[error("degenerate interval: length {length:e} < 10 h = {limit:e}")]
    DegenerateInterval { length: f64, limit: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("unknown field `{field}` for scenario `{scenario}`")]
    UnknownField { scenario: String, field: String },

    #[error("configuration error: {0}")]
    Config(String),
}

impl TransportError {
    pub(crate) fn non_finite(what: &str, values: &[f64]) -> Self {
        TransportError::EvaluationFailure {
            what: what.to_string(),
            detail: format!("non-finite output {values:?}"),
        }
    }

    /// Short machine-readable tag, used in reports and by the C ABI.
    pub fn kind(&self) -> &'static str {
        match self {
            TransportError::EvaluationFailure { .. } => "EvaluationFailure",
            TransportError::RankDeficient { .. } => "RankDeficient",
            TransportError::OrientationAmbiguous { .. } => "OrientationAmbiguous",
            TransportError::MatchFailure { .. } => "MatchFailure",
            TransportError::NoIntegrationPath => "NoIntegrationPath",
            TransportError::WindowExceeded { .. } => "WindowExceeded",
            TransportError::DegenerateInterval { .. } => "DegenerateInterval",
            TransportError::InvalidInput(_) => "InvalidInput",
            TransportError::UnknownScenario(_) => "UnknownScenario",
            TransportError::UnknownField { .. } => "UnknownField",
            TransportError::Config(_) => "Config",
        }
    }
}

pub type Result<T, E = TransportError> = std::result::Result<T, E>;

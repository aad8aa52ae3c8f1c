use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "degenerate parameters: gamma_perp = gamma_P + gamma_A + gamma_D + gamma_c must be > 0"
    )]
    DegenerateParameters,

    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: &'static str, reason: String },

    #[error("no physical steady state: {0}")]
    NoPhysicalRoot(String),

    #[error("absorbing state reached at t = {t} ps (all propensities are zero)")]
    AbsorbingState { t: f64 },

    #[error("non-finite state at t = {t} ps: n_p = {n_p}, n_e = {n_e}")]
    NonFiniteState { t: f64, n_p: f64, n_e: f64 },

    #[error("small-signal solution invalid: omega_R^2 = {omega_r_sq}, Gamma = {gamma_total}")]
    SmallSignalInvalid { omega_r_sq: f64, gamma_total: f64 },

    #[error("statistics undefined: mean photon number is zero")]
    ZeroPhotons,

    #[error("empty averaging window: no observed time after burn-in")]
    EmptyWindow,

    #[error("truth value for `{0}` is zero or undefined")]
    ZeroTruth(&'static str),

    #[error("photon truncation failed: {states} states exceed the ceiling of {ceiling}")]
    TruncationFailure { states: usize, ceiling: usize },

    #[error("configuration error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("malformed csv: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl Error {
    /// Short machine-readable tag, used in the status column of results.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DegenerateParameters => "degenerate_parameters",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::NoPhysicalRoot(_) => "no_physical_root",
            Error::AbsorbingState { .. } => "absorbing_state",
            Error::NonFiniteState { .. } => "non_finite_state",
            Error::SmallSignalInvalid { .. } => "small_signal_invalid",
            Error::ZeroPhotons => "zero_photons",
            Error::EmptyWindow => "empty_window",
            Error::ZeroTruth(_) => "zero_truth",
            Error::TruncationFailure { .. } => "truncation_failure",
            Error::Config { .. } => "config_error",
            Error::Io { .. } => "io_error",
            Error::Csv { .. } => "csv_error",
            Error::Format(_) => "format_error",
        }
    }

    /// Whether the error stems from the user's configuration rather than
    /// from running it.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::InvalidParameter { .. } | Error::DegenerateParameters
        )
    }
}

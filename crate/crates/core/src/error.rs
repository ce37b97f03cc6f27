use thiserror::Error;

/// Failures raised by the vehicle model and its numerical consumers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{quantity} = {value} is outside the valid domain {domain}")]
    Domain {
        quantity: &'static str,
        value: f64,
        domain: String,
    },
    #[error("pitch {theta} rad is within {guard} rad of the Euler singularity")]
    Singularity { theta: f64, guard: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// Failures while reading or validating configuration files.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
    #[error("unknown coefficient `{name}`; valid names: {valid}")]
    UnknownCoefficient { name: String, valid: String },
}

impl ConfigError {
    pub fn invalid(key: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            key: key.into(),
            message: message.into(),
        }
    }
}

pub(crate) fn ensure_finite(values: &[f64], what: &'static str) -> Result<(), ModelError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(ModelError::NonFinite(what))
    }
}

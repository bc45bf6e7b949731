use thiserror::Error;

use jjsim_core::Error as CoreError;

#[derive(Error, Debug)]
pub enum CliError {
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("configuration key `{key}` must be {expected}")]
    TypeMismatch { key: &'static str, expected: &'static str },

    #[error("experiment `{experiment}` requires key `{key}`")]
    Missing { key: &'static str, experiment: &'static str },

    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },

    #[error("cannot read config file {path}: {reason}")]
    ConfigFile { path: String, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(CoreError),

    #[error("no result: {0}")]
    NoResult(String),

    #[error("cannot write {path}: {reason}")]
    Output { path: String, reason: String },
}

impl CliError {
    pub fn invalid(key: &str, reason: impl Into<String>) -> Self {
        CliError::Invalid {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::UnknownKey(_) | CliError::Invalid { .. } | CliError::ConfigFile { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::NoResult(_) => 4,
            CliError::TypeMismatch { .. } => 5,
            CliError::Missing { .. } => 6,
            CliError::Output { .. } => 1,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { name, reason } => CliError::Invalid {
                key: name.to_string(),
                reason,
            },
            CoreError::UnstableFixedPoint { v0 } => {
                CliError::invalid("v0", format!("the equilibrium at v0 = {v0} is unstable"))
            }
            CoreError::TooFewSamples { .. } => CliError::invalid("tau_max", e.to_string()),
            CoreError::NoAttractor { .. } | CoreError::PersistsAtFloor { .. } | CoreError::DegenerateSpectrum => {
                CliError::NoResult(e.to_string())
            }
            other => CliError::Numerical(other),
        }
    }
}

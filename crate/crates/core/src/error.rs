use thiserror::Error;

/// Errors raised by the model, integration and analysis layers.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("step size underflow at t = {t:e} (dt = {dt:e})")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("non-finite state at t = {t:e}")]
    NonFinite { t: f64 },

    #[error("step budget of {0} steps exhausted")]
    MaxSteps(usize),

    #[error("trajectory is not uniformly sampled (sample {index})")]
    NonUniform { index: usize },

    #[error("too few samples for a spectrum: {got} < {min}")]
    TooFewSamples { got: usize, min: usize },

    #[error("spectrum carries no power outside the zero bin")]
    DegenerateSpectrum,

    #[error("fixed point at v0 = {v0} is linearly unstable")]
    UnstableFixedPoint { v0: f64 },

    #[error("no persistent orbit found in the probed direction up to magnitude {max_magnitude:e}")]
    NoAttractor { max_magnitude: f64 },

    #[error("orbit persists already at the smallest probed magnitude {min_magnitude:e}")]
    PersistsAtFloor { min_magnitude: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepUnderflow { .. } | Error::NonFinite { .. } | Error::MaxSteps(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised anywhere in the core crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The single-track equations divide by `vx`; below the floor the model is no longer valid.
    #[error("longitudinal speed {vx} m/s is below the model validity floor of {floor} m/s")]
    BelowSpeedFloor { vx: f64, floor: f64 },

    #[error("steering angle {steer} rad is outside the open interval (-pi/2, pi/2)")]
    SteerOutOfRange { steer: f64 },

    /// A parameter set violates one of its invariants; `invariant` names it.
    #[error("invalid {what}: {invariant}")]
    Invalid {
        what: &'static str,
        invariant: String,
    },

    #[error("trace is empty")]
    EmptyTrace,

    #[error("infeasible tuning bounds for `{param}`: {reason}")]
    InfeasibleBounds { param: String, reason: String },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, invariant: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            invariant: invariant.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Checks a condition and returns [`Error::Invalid`] naming the invariant if it fails.
pub(crate) fn ensure(cond: bool, what: &'static str, invariant: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(what, invariant))
    }
}

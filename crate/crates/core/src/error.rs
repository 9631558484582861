use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The operation was asked to evaluate at `(l, p) = (0, p_c)`.
    CriticalPoint,
    /// An argument lies outside the domain of the operation.
    Domain(String),
    /// The potential failed validation.
    InvalidPotential(String),
    /// A loop was sampled too coarsely to track a continuous quantity along it.
    CoarseSampling { leg: usize, jump: f64 },
    /// The requested tolerance was not reached. `estimate` is the best value obtained.
    Tolerance { estimate: f64, error: f64 },
    /// A numerical procedure failed in a way that should not happen for admissible input.
    Numerical(String),
}

impl Error {
    /// True for failures of the numerics, false for rejected input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Tolerance { .. } | Error::Numerical(_))
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::CriticalPoint => write!(f, "the critical point (l, p) = (0, p_c) is not a regular value"),
            Error::Domain(msg) => write!(f, "invalid argument: {msg}"),
            Error::InvalidPotential(msg) => write!(f, "invalid potential: {msg}"),
            Error::CoarseSampling { leg, jump } => write!(
                f,
                "tracked angle jumps by {jump:.3} rad on leg {leg}; increase samples_per_leg"
            ),
            Error::Tolerance { estimate, error } => write!(
                f,
                "tolerance not reached (best estimate {estimate:e}, error estimate {error:e})"
            ),
            Error::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

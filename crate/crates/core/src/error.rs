use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    InvalidArgument(String),
    /// The implicit hysteresis coupling did not converge within the
    /// configured number of Picard sweeps.
    FixedPointDiverged { step: usize, residual: f64 },
    /// The step size violates `L * dt <= 1/2` while the guard is enabled.
    StepGuard { lipschitz: f64, dt: f64 },
    /// Zero pivot in a tridiagonal elimination.
    ZeroPivot { row: usize },
    /// A solve inside a study failed at the given ladder value.
    AtLadderPoint { lambda: f64, source: Box<Error> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::FixedPointDiverged { step, residual } => write!(
                f,
                "fixed-point iteration did not converge at time step {step} (last residual {residual:e})"
            ),
            Error::StepGuard { lipschitz, dt } => write!(
                f,
                "step guard violated: L * dt = {} > 1/2 (L = {lipschitz}, dt = {dt})",
                lipschitz * dt
            ),
            Error::ZeroPivot { row } => write!(f, "zero pivot in tridiagonal solve at row {row}"),
            Error::AtLadderPoint { lambda, source } => write!(f, "at lambda = {lambda:e}: {source}"),
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::AtLadderPoint { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}

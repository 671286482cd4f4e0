use alloc::string::String;
use core::fmt;

use crate::tree::ParseError;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Gamma function evaluated at (or within 1e-12 of) a nonpositive integer.
    Pole { x: f64 },
    /// An argument outside the domain of the function it was passed to.
    Domain(String),
    /// Quadrature levels failed to stabilise before the level cap.
    NoConvergence { levels: u32, estimate: f64, delta: f64 },
    Parse(ParseError),
    InvalidTree(String),
    InvalidParams(String),
    /// Cartesian and hyperspherical states belong to different energy shells.
    ShellMismatch { cartesian: u32, hyperspherical: u32 },
    /// Clebsch-Gordan arguments lack the integer structure the continued formula needs.
    CgArgs(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Pole { x } => write!(f, "gamma function pole at x = {x}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::NoConvergence { levels, estimate, delta } => write!(
                f,
                "quadrature did not converge after {levels} levels (estimate {estimate:e}, last change {delta:e})"
            ),
            Error::Parse(e) => write!(f, "{e}"),
            Error::InvalidTree(msg) => write!(f, "invalid tree: {msg}"),
            Error::InvalidParams(msg) => write!(f, "invalid model parameters: {msg}"),
            Error::ShellMismatch { cartesian, hyperspherical } => write!(
                f,
                "states lie on different shells: cartesian N = {cartesian}, hyperspherical N = {hyperspherical}"
            ),
            Error::CgArgs(msg) => write!(f, "invalid Clebsch-Gordan arguments: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

impl From<ParseError> for Error {
    fn from(e: ParseError) -> Self {
        Error::Parse(e)
    }
}

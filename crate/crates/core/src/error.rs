use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A precondition on shapes, counts or parameters was violated.
    InvalidArgument(String),
    /// A normalized metric whose reference norm is zero.
    UndefinedMetric(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::UndefinedMetric(name) => {
                write!(f, "{name} is undefined: reference has zero norm")
            }
        }
    }
}

impl core::error::Error for Error {}

/// Shorthand for `Err(Error::InvalidArgument(format!(...)))`.
macro_rules! invalid {
    ($($arg:tt)*) => {
        return Err($crate::error::Error::InvalidArgument(alloc::format!($($arg)*)))
    };
}
pub(crate) use invalid;

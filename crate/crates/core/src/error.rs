use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A channel or experiment parameter is out of its valid range.
    InvalidParams(&'static str),
    /// An argument violated an operation precondition.
    InvalidArgument(&'static str),
    /// The nodal-analysis system of a sneak-path network was singular.
    SingularNetwork,
    /// An integer count did not fit in 128 bits.
    Overflow,
    /// The requested search space is too large to enumerate.
    TooLarge { size: u128, limit: u128 },
    /// Message or word length does not match the code.
    LengthMismatch { expected: usize, actual: usize },
    /// The MAP decision boundary has more roots than the model allows.
    TooManyRoots(usize),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParams(what) => write!(f, "invalid channel parameters: {what}"),
            Error::InvalidArgument(what) => write!(f, "invalid argument: {what}"),
            Error::SingularNetwork => f.write_str("sneak-path network is singular"),
            Error::Overflow => f.write_str("integer overflow in combinatorial count"),
            Error::TooLarge { size, limit } => {
                write!(f, "search space of {size} candidates exceeds limit {limit}")
            }
            Error::LengthMismatch { expected, actual } => {
                write!(f, "expected length {expected}, got {actual}")
            }
            Error::TooManyRoots(n) => write!(f, "decision boundary has {n} roots"),
        }
    }
}

impl core::error::Error for Error {}

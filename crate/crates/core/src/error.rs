use std::ops::Range;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("corrupt buffer: {0}")]
    CorruptBuffer(String),

    #[error("singular matrix: pivot {pivot} of block rows {rows:?} x cols {cols:?} is (near) zero")]
    Singular {
        rows: Range<usize>,
        cols: Range<usize>,
        pivot: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn corrupt(msg: impl Into<String>) -> Error {
    Error::CorruptBuffer(msg.into())
}

use thiserror::Error;

use crate::inequality::Party;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("setting index {index} out of range for party {party} with {m} settings")]
    IndexOutOfRange { party: Party, index: usize, m: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("deterministic-strategy enumeration needs m_A + m_B <= 30, got {0}")]
    TooLarge(usize),

    #[error("violation does not depend on alpha for these measurements")]
    Degenerate,

    #[error("probability has imaginary part {0:e}; operators are not Hermitian")]
    ImaginaryResidue(f64),

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

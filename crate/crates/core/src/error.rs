use thiserror::Error;

/// Errors raised by the chemistry layer (parsing, perception, properties).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChemError {
    #[error("SMILES syntax error at position {position}: {reason}")]
    Syntax { position: usize, reason: String },
    #[error("valence violation on atom {atom} ({symbol}): valence {valence}")]
    Valence {
        atom: usize,
        symbol: String,
        valence: u32,
    },
    #[error("unmatched ring-closure digit {digit}")]
    UnmatchedRingClosure { digit: u32 },
    #[error("invalid molecule: {0}")]
    Invalid(String),
    #[error("coordinates required but missing")]
    MissingCoordinates,
    #[error("no parameters for element {0}")]
    UnparameterizedElement(String),
    #[error("missing property: {0}")]
    MissingProperty(String),
}

pub type Result<T> = std::result::Result<T, ChemError>;

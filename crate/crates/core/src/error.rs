use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("twice-spin must be at least 1, got {0}")]
    InvalidSpin(u32),

    #[error("index component {value} out of range for leg {leg} (max {max})")]
    IndexOutOfRange { leg: usize, value: usize, max: usize },

    #[error("expected {expected} entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("kronecker product of {entries} entries exceeds cap of {cap}")]
    DimensionCap { entries: u128, cap: u128 },

    #[error("exponent {0} overflows double precision")]
    Overflow(f64),

    #[error("weight {value} at position {position} is not strictly positive")]
    NonPositiveWeight { position: usize, value: f64 },

    #[error("closed form requires spin-1/2 legs in the normalized convention")]
    WrongConvention,

    #[error("state space of {states} exceeds enumeration cap of {cap}")]
    StateSpaceTooLarge { states: u128, cap: u128 },

    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },

    #[error("invalid step {0}")]
    InvalidStep(f64),

    #[error("site {site} does not exist (lattice has {count} sites)")]
    InvalidSite { site: usize, count: usize },

    #[error("cell {0} does not exist")]
    InvalidCell(usize),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("missing effective correlator for multi-index {0:?}")]
    MissingCorrelator(Vec<usize>),

    #[error("{0}")]
    Format(String),
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("not-TL1: index {0} occurs more than once")]
    NotTl1(i64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("window-too-small: k = {k} needs M >= {min}, got {m}")]
    WindowTooSmall { k: usize, m: usize, min: usize },
    #[error("no-canonical-shift: the identity diagram has no window")]
    NoCanonicalShift,
    #[error("no-solution: {0}")]
    NoSolution(String),
    #[error("invalid monoid index {j} for chain length {l}")]
    InvalidIndex { j: usize, l: usize },
    #[error("chain-too-short: k = {k} needs L >= {min}, got {l}")]
    ChainTooShort { k: usize, l: usize, min: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("unknown environment code for monoid {0}")]
    UnknownCode(i64),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("term is not a single-occurrence word: {0}")]
    NonTl1Term(String),
    #[error("boundary-contaminated bulk: {0}")]
    Contaminated(String),
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

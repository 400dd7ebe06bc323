use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("truncation insufficient: {0}")]
    TruncationInsufficient(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("invalid evaluation context: {0}")]
    InvalidContext(String),

    #[error("invalid fan: {}", .0.join("; "))]
    InvalidFan(Vec<String>),

    #[error("cone {0:?} not in fan")]
    ConeNotFound(Vec<usize>),

    #[error("cone {cone} not smooth, |det| = {det}")]
    NotSmooth { cone: usize, det: i128 },

    #[error("cone {0} is not contained in exactly one target cone")]
    Straddle(usize),

    #[error("non-polynomial residue in pushforward over target cone {0}")]
    NonPolynomialResidue(usize),

    #[error("not a pulled-back pair: {0}")]
    NotPulledBack(String),

    #[error("no generic sample found after {0} rejections")]
    SampleExhausted(usize),

    #[error("extrapolation diverged: {0}")]
    Divergence(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

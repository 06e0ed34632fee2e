use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid optical element: {0}")]
    InvalidOp(String),

    #[error("matrix is not unitary: defect {defect:e} exceeds {tol:e}")]
    InvalidUnitary { defect: f64, tol: f64 },

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("photon-number mismatch: input carries {input} photons, output carries {output}")]
    PhotonNumberMismatch { input: u64, output: u64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("Fock cutoff {cutoff} too small: truncation leakage {leakage:e} exceeds {tol:e}")]
    CutoffTooSmall {
        cutoff: usize,
        leakage: f64,
        tol: f64,
    },

    #[error("distribution is not normalized: total mass {0}")]
    InvalidDistribution(f64),

    #[error("post-selection retained zero probability mass")]
    EmptyPostselection,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

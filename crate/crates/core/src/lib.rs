pub mod analysis;
pub mod gate;
pub mod geometry;
pub mod harness;
pub mod noise;
pub mod operator;
pub mod quad;
pub mod solver;

/// Errors surfaced by the toolkit. Variants map onto the CLI exit codes:
/// `Config` -> 3, `Io` -> 4, everything else is an internal invariant
/// violation reported as a suite failure.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("gate rejected parameter set: {0}")]
    Gate(String),
    #[error("numerical invariant violated: {0}")]
    Numerics(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the physical or mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An emission would leave a remnant that is not a valid black hole.
    #[error("remnant invalid: {0}")]
    RemnantInvalid(String),

    /// Caller violated an operation's usage contract.
    #[error("usage error: {0}")]
    Usage(String),

    /// A cascade reached a state with no admissible emission before its stopping mass.
    #[error("simulation stuck: {0}")]
    SimulationStuck(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    /// Process exit code for this failure: 1 usage, 2 invalid physics, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Domain(_) | Error::RemnantInvalid(_) => 2,
            Error::SimulationStuck(_) | Error::Numerical(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

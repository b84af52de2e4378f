use thiserror::Error;

/// Errors raised by constructors and evaluators in this crate.
///
/// Verification outcomes (an array that is not a PDA, a set that contains an
/// arithmetic progression, ...) are reported as verdict values, not errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus {0} must be odd and at least 3")]
    InvalidModulus(u64),

    #[error("residue {value} is outside [0, {modulus})")]
    ResidueOutOfRange { value: u64, modulus: u64 },

    #[error("modulus {v} is below the minimum admissible value {min} (2*phi+1)")]
    ModulusTooSmall { v: u64, min: u64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{scheme}: constraint violated: {constraint}")]
    ConstraintViolated { scheme: String, constraint: String },

    #[error("not an NHSDP: {0}")]
    NotAnNhsdp(String),

    #[error("not a PDA: {0}")]
    NotAPda(String),

    #[error("user {user} cannot recover packet {packet}: interfering packet ({file}, {missing}) is not cached")]
    Unrecoverable { user: usize, packet: usize, file: usize, missing: usize },

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

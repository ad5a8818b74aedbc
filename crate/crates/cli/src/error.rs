use thiserror::Error;

/// Exit codes, also listed in the README.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 2;
    pub const CONFIG: u8 = 3;
    pub const RANGE: u8 = 4;
    pub const INPUT: u8 = 5;
    pub const NUMERICAL: u8 = 6;
    pub const OUTPUT: u8 = 7;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("{path}: {source}")]
    File { path: String, source: pwinterp::Error },
    #[error(transparent)]
    Module(#[from] pwinterp::Error),
    #[error("writing output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Config(_) => exit::CONFIG,
            CliError::File { source, .. } => module_code(source),
            CliError::Range(_) => exit::RANGE,
            CliError::Output(_) => exit::OUTPUT,
            CliError::Module(e) => module_code(e),
        }
    }
}

fn module_code(e: &pwinterp::Error) -> u8 {
    use pwinterp::Error as E;
    match e {
        E::InvalidParameter(_) => exit::RANGE,
        E::Parse { .. } => exit::CONFIG,
        E::DuplicatePoints { .. }
        | E::OutsideHalfPlane { .. }
        | E::CoincidentPoints
        | E::Degenerate
        | E::MissingStripBound
        | E::FamilyMismatch(_)
        | E::EpsilonMismatch { .. }
        | E::UnstableEigenvalue { .. }
        | E::UncontrollableMode { .. } => exit::INPUT,
        E::QuadratureNotConverged { .. }
        | E::TruncationInsufficient { .. }
        | E::Range { .. }
        | E::MultipleZero { .. }
        | E::ProductUnderflow { .. }
        | E::SimulationNotConverged { .. } => exit::NUMERICAL,
    }
}

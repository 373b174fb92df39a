use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Lib(#[from] fracgrav::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("verification failed: {0}")]
    Verification(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    /// A closed downstream pipe (`| head`) is not a failure.
    pub fn is_broken_pipe(&self) -> bool {
        let io = match self {
            CliError::Io(e) => Some(e),
            CliError::Csv(e) => match e.kind() {
                csv::ErrorKind::Io(e) => Some(e),
                _ => None,
            },
            _ => None,
        };
        io.is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
    }

    /// 2 for bad input, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        use fracgrav::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(
                E::InvalidLevyIndex(_)
                | E::InvalidGrid(_)
                | E::InvalidOrder(_)
                | E::InvalidWindow(_)
                | E::InvalidScale(_)
                | E::InvalidTolerance { .. }
                | E::ConfigMissing(_)
                | E::ConfigParse { .. }
                | E::UnknownParticle(_)
                | E::InvalidInput(_),
            ) => 2,
            _ => 1,
        }
    }
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Model(#[from] beatdelay::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    /// 2 for bad arguments, 1 for numerical or I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) => e.exit_code(),
            CliError::Config(_) => 2,
            CliError::Model(beatdelay::Error::InvalidParameter { .. }) => 2,
            CliError::Model(_) | CliError::Io(_) | CliError::Runtime(_) => 1,
        }
    }
}

use thiserror::Error;

/// Failures before or during a run. Certificate rejections are not errors:
/// they are reported results and surface as exit code 2.
#[derive(Debug, Error)]
pub enum CliError {
    /// Config-file problems, always with the offending line.
    #[error("{path}:{line}: {msg}")]
    Config {
        path: String,
        line: usize,
        msg: String,
    },
    /// Bad flag values, missing keys, inconsistent combinations.
    #[error("{0}")]
    Usage(String),
    /// A core computation refused the resolved configuration.
    #[error("{0}")]
    Run(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn run(err: impl std::fmt::Display) -> Self {
        CliError::Run(err.to_string())
    }
}

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Argument parsing failed, or help/version was requested.
    Clap(clap::Error),
    /// Bad flags or configuration.
    Usage(String),
    /// Anything that went wrong while doing the work.
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) => e.exit_code(),
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Clap(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Runtime(e) => {
                // library errors repeat their source in the message; print each cause once
                let mut shown = e.to_string();
                for cause in e.chain().skip(1) {
                    let c = cause.to_string();
                    if !shown.ends_with(&c) {
                        shown = format!("{shown}: {c}");
                    }
                }
                write!(f, "{shown}")
            }
        }
    }
}

impl std::error::Error for CliError {}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<qtsvm::Error> for CliError {
    fn from(e: qtsvm::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

use std::fmt;

/// A subcommand failure, classified by process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or an invalid configuration.
    Usage(anyhow::Error),
    /// Unreadable, malformed or inconsistent input files, or I/O errors.
    Data(anyhow::Error),
    /// A self-check ran to completion and did not pass.
    Check(String),
}

pub type CmdResult<T = ()> = Result<T, Failure>;

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Check(_) => 3,
        }
    }

    pub fn usage(msg: impl fmt::Display) -> Self {
        Failure::Usage(anyhow::anyhow!("{msg}"))
    }

    pub fn data(msg: impl fmt::Display) -> Self {
        Failure::Data(anyhow::anyhow!("{msg}"))
    }

    pub fn context(self, ctx: impl fmt::Display + Send + Sync + 'static) -> Self {
        match self {
            Failure::Usage(e) => Failure::Usage(e.context(ctx)),
            Failure::Data(e) => Failure::Data(e.context(ctx)),
            Failure::Check(msg) => Failure::Check(format!("{ctx}: {msg}")),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(e) | Failure::Data(e) => write!(f, "{e:#}"),
            Failure::Check(msg) => f.write_str(msg),
        }
    }
}

impl From<wlda_core::Error> for Failure {
    fn from(e: wlda_core::Error) -> Self {
        match e {
            wlda_core::Error::InvalidArgument(_) => Failure::Usage(e.into()),
            _ => Failure::Data(e.into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.into())
    }
}

pub trait ResultExt<T> {
    fn with_context(self, ctx: impl FnOnce() -> String) -> CmdResult<T>;
}

impl<T, E: Into<Failure>> ResultExt<T> for Result<T, E> {
    fn with_context(self, ctx: impl FnOnce() -> String) -> CmdResult<T> {
        self.map_err(|e| e.into().context(ctx()))
    }
}

use std::fmt;

use qlabel::Error;

/// A command failure, grouped by exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    pub fn context(self, prefix: &str) -> Failure {
        match self {
            Failure::Usage(m) => Failure::Usage(format!("{prefix}: {m}")),
            Failure::Data(m) => Failure::Data(format!("{prefix}: {m}")),
            Failure::Numeric(m) => Failure::Numeric(format!("{prefix}: {m}")),
        }
    }

    /// Reclassifies configuration complaints about a file's contents as data
    /// errors.
    pub fn in_file(e: Error, path: &std::path::Path) -> Failure {
        match Failure::from(e) {
            Failure::Usage(m) => Failure::Data(format!("{}: {m}", path.display())),
            Failure::Data(m) if m.starts_with(&path.display().to_string()) => Failure::Data(m),
            other => other.context(&path.display().to_string()),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Data(m) => write!(f, "data error: {m}"),
            Failure::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Config(_) | Error::ZeroShots | Error::InvalidProbability { .. } => Failure::Usage(msg),
            Error::NotNormalized(_)
            | Error::DegenerateReadout
            | Error::UndefinedDirection
            | Error::DegenerateCluster(_)
            | Error::DuplicateLabels(..)
            | Error::NonFinite(_) => Failure::Numeric(msg),
            _ => Failure::Data(msg),
        }
    }
}

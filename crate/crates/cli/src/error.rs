use std::fmt;

/// Failure classes, each with a stable exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Usage,
    Parse,
    Validation,
    Imputation,
    Io,
    Numerical,
}

impl Kind {
    pub fn code(self) -> &'static str {
        match self {
            Kind::Usage => "usage",
            Kind::Parse => "parse",
            Kind::Validation => "validation",
            Kind::Imputation => "imputation",
            Kind::Io => "io",
            Kind::Numerical => "numerical",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Usage => 2,
            Kind::Parse | Kind::Validation | Kind::Imputation | Kind::Io => 3,
            Kind::Numerical => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn new(kind: Kind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(Kind::Usage, message)
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(Kind::Validation, message)
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Self::new(Kind::Io, format!("{}: {err}", path.display()))
    }

    /// `error[code]: text`, newlines flattened.
    pub fn line(&self) -> String {
        let text: Vec<&str> = self.message.split_whitespace().collect();
        format!("error[{}]: {}", self.kind.code(), text.join(" "))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.line())
    }
}

impl std::error::Error for CliError {}

impl From<evmix::Error> for CliError {
    fn from(e: evmix::Error) -> Self {
        let kind = match e {
            evmix::Error::Numerical(_) => Kind::Numerical,
            _ => Kind::Validation,
        };
        CliError::new(kind, e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

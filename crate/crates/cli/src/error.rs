use std::fmt;

/// Machine-readable failure classes. Each maps to a distinct exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Code {
    Usage,
    Config,
    Io,
    Format,
    ConfigMismatch,
    Numeric,
    ResidualGate,
}

impl Code {
    pub fn name(self) -> &'static str {
        match self {
            Code::Usage => "usage",
            Code::Config => "config-invalid",
            Code::Io => "io",
            Code::Format => "format",
            Code::ConfigMismatch => "config-mismatch",
            Code::Numeric => "numeric",
            Code::ResidualGate => "residual-gate",
        }
    }

    pub fn exit_status(self) -> i32 {
        match self {
            Code::Usage => 2,
            Code::Config => 3,
            Code::Io => 4,
            Code::Format => 5,
            Code::ConfigMismatch => 6,
            Code::Numeric => 7,
            Code::ResidualGate => 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: Code,
    pub message: String,
}

impl CliError {
    pub fn new(code: Code, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new(Code::Config, message)
    }

    pub fn format(message: impl Into<String>) -> Self {
        Self::new(Code::Format, message)
    }

    pub fn io(path: &std::path::Path, err: impl fmt::Display) -> Self {
        Self::new(Code::Io, format!("{}: {err}", path.display()))
    }

    /// The single line printed on failure, e.g.
    /// `error: code=config-invalid message="dt must be positive"`.
    pub fn line(&self) -> String {
        let msg: String = self.message.chars().map(|c| if c == '\n' { ' ' } else { c }).collect();
        format!("error: code={} message={:?}", self.code.name(), msg)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code.name(), self.message)
    }
}

impl std::error::Error for CliError {}

impl From<sclon_core::Error> for CliError {
    fn from(e: sclon_core::Error) -> Self {
        use sclon_core::Error as E;
        let code = match e {
            E::Shape(_) | E::InvalidParameter(_) => Code::Config,
            _ => Code::Numeric,
        };
        Self::new(code, e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

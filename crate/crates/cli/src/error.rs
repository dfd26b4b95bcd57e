use std::fmt;

/// Failure of a subcommand, carrying its process exit status.
#[derive(Debug)]
pub enum CliError {
    /// Malformed JSON or a document with the wrong structure (exit 64).
    Parse(String),
    /// Input file could not be read (exit 66).
    Io(std::io::Error),
    /// Library error; the exit status depends on the kind.
    Core(ellinc::error::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use ellinc::error::Error as E;
        match self {
            CliError::Parse(_) => 64,
            CliError::Io(_) => 66,
            CliError::Core(e) => match e {
                E::NotTouching { .. } => 3,
                E::DimensionMismatch { .. }
                | E::NotPositiveDefinite { .. }
                | E::NotSquare { .. }
                | E::NotSymmetric { .. }
                | E::NonFinite
                | E::Empty
                | E::ZeroDisturbance
                | E::SingularFactor { .. } => 65,
                _ => 70,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(msg) => write!(f, "parse error: {msg}"),
            CliError::Io(e) => write!(f, "cannot read input: {e}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ellinc::error::Error> for CliError {
    fn from(e: ellinc::error::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

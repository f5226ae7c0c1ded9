use std::path::PathBuf;

use spibisim::bisim::UnknownUpToRule;
use spibisim::syntax::ParseError;
use thiserror::Error;

/// Everything that ends a run with exit code 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// `origin` is a file path or the name of a command-line flag.
    #[error("{origin}: {source}")]
    Parse {
        origin: String,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    UpTo(#[from] UnknownUpToRule),
    #[error("{0}")]
    IllFormed(String),
}

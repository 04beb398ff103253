use std::fmt;
use std::path::PathBuf;

use hypaff_core::ErrorKind;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_RESOURCE: u8 = 3;
pub const EXIT_CERTIFICATION: u8 = 4;
const EXIT_IO: u8 = 1;

#[derive(Debug)]
pub enum Failure {
    /// Flags or inputs rejected before any computation.
    Usage(String),
    Core(hypaff_core::Error),
    Io(PathBuf, std::io::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => EXIT_VALIDATION,
            Failure::Core(e) => match e.kind() {
                ErrorKind::Validation => EXIT_VALIDATION,
                ErrorKind::Resource => EXIT_RESOURCE,
                ErrorKind::Certification => EXIT_CERTIFICATION,
            },
            Failure::Io(..) => EXIT_IO,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "{msg}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

impl From<hypaff_core::Error> for Failure {
    fn from(e: hypaff_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Core(e.into())
    }
}

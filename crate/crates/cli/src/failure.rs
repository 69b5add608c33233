use std::path::Path;

use labelforge_core::Error;

/// Exit status plus a one-line JSON description on stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub kind: String,
    pub message: String,
}

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_MISSING_INPUT: u8 = 3;

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            kind: "usage".into(),
            message: message.into(),
        }
    }

    pub fn missing(path: &Path) -> Self {
        Self {
            code: EXIT_MISSING_INPUT,
            kind: "missing_input".into(),
            message: format!("{} does not exist", path.display()),
        }
    }

    pub fn other(kind: &str, message: impl Into<String>) -> Self {
        Self {
            code: EXIT_FAILURE,
            kind: kind.into(),
            message: message.into(),
        }
    }

    pub fn line(&self) -> String {
        serde_json::json!({ "error": { "kind": self.kind, "message": self.message } }).to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::other(e.kind(), e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::other("json", e.to_string())
    }
}

/// Fails with exit code 3 unless `path` exists.
pub fn require(path: &Path) -> Result<&Path, Failure> {
    if path.exists() {
        Ok(path)
    } else {
        Err(Failure::missing(path))
    }
}

pub fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::other("io", format!("{}: {e}", path.display()))
}

use std::fmt::Display;
use std::io::Write;
use std::path::Path;

use chainamp::{Error, ErrorKind};

pub const EXIT_PARSE: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_PRECONDITION: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn parse(message: impl Display) -> Self {
        Self {
            code: EXIT_PARSE,
            message: message.to_string(),
        }
    }

    pub fn validation(message: impl Display) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.to_string(),
        }
    }

    pub fn precondition(message: impl Display) -> Self {
        Self {
            code: EXIT_PRECONDITION,
            message: message.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        match err.kind() {
            ErrorKind::Parse => Failure::parse(err),
            ErrorKind::Validation => Failure::validation(err),
            ErrorKind::Precondition => Failure::precondition(err),
        }
    }
}

/// Writes `text` plus a trailing newline to `path`, or to standard output.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    let mut text = text.to_owned();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Failure::parse(format!("cannot write {}: {e}", p.display()))),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .and_then(|_| lock.flush())
                .map_err(|e| Failure::parse(format!("cannot write output: {e}")))
        }
    }
}

pub fn json(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("values always serialize")
}

/// Header plus rows, comma separated, LF line endings.
pub fn csv<R: AsRef<[String]>>(header: &[&str], rows: &[R]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.as_ref().join(","));
        out.push('\n');
    }
    out
}

/// Shortest round-trip representation, the same one the JSON output uses.
pub fn num(x: f64) -> String {
    serde_json::to_string(&x).expect("finite floats serialize")
}

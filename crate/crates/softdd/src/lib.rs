pub mod cli;
pub mod config;
pub mod constraint_io;
pub mod corpus;
mod error;
pub mod features;
pub mod model_io;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use error::{Error, Result};

use std::io::Write;
use std::path::Path;

/// Writes via a temporary file in the same directory, renamed into place, so
/// a failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

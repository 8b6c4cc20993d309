use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

/// Fails early if the file could not be created later.
pub fn check_writable(path: &Path) -> Result<(), CliError> {
    let dir = parent(path);
    if !dir.is_dir() {
        return Err(CliError::Data(format!("output directory {} does not exist", dir.display())));
    }
    if path.is_dir() {
        return Err(CliError::Data(format!("output path {} is a directory", path.display())));
    }
    Ok(())
}

pub fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))
}

/// Writes to a temporary file in the target directory, then renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Data(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(parent(path)).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn parent(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

//! File formats: CSV series data, model files, scenario configs.

pub mod config;
pub mod csvio;
pub mod keyvalue;
pub mod model;

use std::path::Path;

use crate::error::Result;

/// Writes via a sibling temp file and rename, so readers never observe a
/// partially written file and a failed write leaves any previous version
/// intact.
pub fn write_atomic_bytes(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("output");
    let tmp_name = format!(".{file_name}.{}.tmp", std::process::id());
    let tmp_path = match dir {
        Some(d) => d.join(&tmp_name),
        None => std::path::PathBuf::from(&tmp_name),
    };
    std::fs::write(&tmp_path, contents)?;
    match std::fs::rename(&tmp_path, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = std::fs::remove_file(&tmp_path);
            Err(e.into())
        }
    }
}

/// Text flavour of [`write_atomic_bytes`].
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    write_atomic_bytes(path, contents.as_bytes())
}

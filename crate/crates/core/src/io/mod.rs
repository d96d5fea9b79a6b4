//! File formats and persistence.
//!
//! * spectra: two-column XY text (`angle intensity`), whitespace or comma
//!   separated, `#` starts a comment line
//! * manifests: CSV with header `sample_id,file,<phase_1>,...,<phase_M>`
//! * libraries: versioned JSON
//! * exports: CSV plot data plus static SVG renderings
//!
//! Floats are always written in their shortest exactly-reparsing form, and
//! every file is written to a temporary sibling and renamed into place.

mod export;
mod library;
mod manifest;
mod xy;

use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::spectra::CoreError;

pub use export::{
    bar_chart_svg, phase_curves_svg, write_bar_data, write_phase_curves, write_predictions,
    PhaseOverlay,
};
pub use library::{load_library, save_library, LIBRARY_FORMAT, LIBRARY_VERSION};
pub use manifest::{load_dataset, read_manifest, write_dataset, Manifest, ManifestEntry};
pub use xy::{read_spectrum_file, read_xy, write_xy, XyData};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("ParseError: {path}{}: {message}", line.map(|l| format!(" line {l}")).unwrap_or_default())]
    Parse {
        path: PathBuf,
        line: Option<u64>,
        message: String,
    },
    #[error("MissingFile: {0}")]
    MissingFile(PathBuf),
    #[error("GridMismatch: {other} does not share the angle grid of {first}")]
    GridMismatch { first: PathBuf, other: PathBuf },
    #[error("VersionMismatch: {path} has format version {found}, expected {expected}")]
    VersionMismatch {
        path: PathBuf,
        found: String,
        expected: u32,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl IoError {
    pub(crate) fn parse(path: &Path, line: Option<u64>, message: impl Into<String>) -> Self {
        IoError::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        if source.kind() == std::io::ErrorKind::NotFound {
            IoError::MissingFile(path.to_path_buf())
        } else {
            IoError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    }
}

pub(crate) fn read_to_string(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))
}

/// Writes `contents` to a temporary file next to `path`, then renames it
/// over `path`. Parent directories are created as needed.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(parent).map_err(|e| IoError::io(parent, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(|e| IoError::io(parent, e))?;
    tmp.write_all(contents).map_err(|e| IoError::io(path, e))?;
    tmp.persist(path).map_err(|e| IoError::io(path, e.error))?;
    Ok(())
}

/// Pretty JSON, written atomically.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| IoError::parse(path, None, e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

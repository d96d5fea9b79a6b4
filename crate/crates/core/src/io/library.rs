use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{read_to_string, write_atomic, IoError};
use crate::spectra::{AngleGrid, PhaseLibrary, PhaseNames};

pub const LIBRARY_FORMAT: &str = "phasefrac-library";
pub const LIBRARY_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct PhaseRecord {
    name: String,
    intensities: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct LibraryFile {
    format: String,
    version: u32,
    angles: Vec<f64>,
    phases: Vec<PhaseRecord>,
}

pub fn save_library(library: &PhaseLibrary, path: &Path) -> Result<(), IoError> {
    let file = LibraryFile {
        format: LIBRARY_FORMAT.to_string(),
        version: LIBRARY_VERSION,
        angles: library.grid().angles().to_vec(),
        phases: library
            .phase_names()
            .iter()
            .zip(library.patterns())
            .map(|(name, p)| PhaseRecord {
                name: name.clone(),
                intensities: p.clone(),
            })
            .collect(),
    };
    let mut text =
        serde_json::to_string(&file).map_err(|e| IoError::parse(path, None, e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn load_library(path: &Path) -> Result<PhaseLibrary, IoError> {
    let text = read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| IoError::parse(path, Some(e.line() as u64), e.to_string()))?;
    match value.get("format").and_then(|f| f.as_str()) {
        Some(LIBRARY_FORMAT) => {}
        other => {
            return Err(IoError::parse(
                path,
                None,
                format!("not a phase library (format field {other:?})"),
            ))
        }
    }
    match value.get("version") {
        None => return Err(IoError::parse(path, None, "missing version field")),
        Some(v) if v.as_u64() != Some(u64::from(LIBRARY_VERSION)) => {
            return Err(IoError::VersionMismatch {
                path: path.to_path_buf(),
                found: v.to_string(),
                expected: LIBRARY_VERSION,
            })
        }
        Some(_) => {}
    }
    let file: LibraryFile =
        serde_json::from_value(value).map_err(|e| IoError::parse(path, None, e.to_string()))?;
    let grid = Arc::new(AngleGrid::new(file.angles)?);
    let names: PhaseNames = file
        .phases
        .iter()
        .map(|p| p.name.clone())
        .collect::<Vec<_>>()
        .into();
    let patterns = file.phases.into_iter().map(|p| p.intensities).collect();
    Ok(PhaseLibrary::new(patterns, names, grid)?)
}

use std::path::{Path, PathBuf};
use std::sync::Arc;

use super::xy::{read_spectrum_file, write_xy};
use super::{read_to_string, write_atomic, IoError};
use crate::spectra::{validate_dataset, AngleGrid, Dataset, PhaseNames, RawSample};

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub sample_id: String,
    /// As written in the manifest; relative paths are resolved against the
    /// manifest's directory.
    pub file: PathBuf,
    pub fractions: Vec<f64>,
    pub line: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub phase_names: PhaseNames,
    pub entries: Vec<ManifestEntry>,
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(text.as_bytes())
}

pub fn read_manifest(path: &Path) -> Result<Manifest, IoError> {
    let text = read_to_string(path)?;
    let mut rdr = reader(&text);
    let header = rdr
        .headers()
        .map_err(|e| IoError::parse(path, Some(1), e.to_string()))?
        .clone();
    if header.len() < 3
        || !header[0].eq_ignore_ascii_case("sample_id")
        || !header[1].eq_ignore_ascii_case("file")
    {
        return Err(IoError::parse(
            path,
            Some(1),
            "header must be `sample_id,file,<phase_1>,...`",
        ));
    }
    let phase_names: PhaseNames = header
        .iter()
        .skip(2)
        .map(str::to_string)
        .collect::<Vec<_>>()
        .into();

    let mut entries = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line());
            IoError::parse(path, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != header.len() {
            return Err(IoError::parse(
                path,
                Some(line),
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        let fractions = record
            .iter()
            .skip(2)
            .map(|f| {
                f.parse::<f64>().map_err(|_| {
                    IoError::parse(path, Some(line), format!("`{f}` is not a number"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if record[0].is_empty() || record[1].is_empty() {
            return Err(IoError::parse(path, Some(line), "empty sample id or file"));
        }
        entries.push(ManifestEntry {
            sample_id: record[0].to_string(),
            file: PathBuf::from(&record[1]),
            fractions,
            line,
        });
    }
    Ok(Manifest {
        phase_names,
        entries,
    })
}

fn resolve(manifest_path: &Path, file: &Path) -> PathBuf {
    if file.is_absolute() {
        file.to_path_buf()
    } else {
        manifest_path
            .parent()
            .unwrap_or_else(|| Path::new(""))
            .join(file)
    }
}

/// Reads a manifest and every spectrum it references. All spectra must sit
/// on exactly the angle grid of the first one.
pub fn load_dataset(manifest_path: &Path) -> Result<Dataset, IoError> {
    let manifest = read_manifest(manifest_path)?;
    if manifest.entries.is_empty() {
        return Err(IoError::parse(manifest_path, None, "manifest lists no samples"));
    }
    let mut grid: Option<(Arc<AngleGrid>, PathBuf)> = None;
    let mut raw = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        let path = resolve(manifest_path, &entry.file);
        let xy = read_spectrum_file(&path)?;
        match &grid {
            None => {
                let g = AngleGrid::new(xy.angles).map_err(|e| {
                    IoError::parse(&path, None, format!("bad angle column: {e}"))
                })?;
                grid = Some((Arc::new(g), path.clone()));
            }
            Some((g, first)) => {
                let same = g.len() == xy.angles.len()
                    && g
                        .angles()
                        .iter()
                        .zip(&xy.angles)
                        .all(|(a, b)| a.to_bits() == b.to_bits());
                if !same {
                    return Err(IoError::GridMismatch {
                        first: first.clone(),
                        other: path,
                    });
                }
            }
        }
        raw.push(RawSample {
            id: entry.sample_id.clone(),
            intensities: xy.intensities,
            fractions: entry.fractions.clone(),
        });
    }
    let (grid, _) = grid.expect("at least one entry");
    Ok(validate_dataset(raw, grid, manifest.phase_names)?)
}

/// Writes every spectrum to `<dir>/spectra/<id>.xy` and a manifest
/// referencing them to `<dir>/<manifest_name>`. Returns the manifest path.
pub fn write_dataset(dataset: &Dataset, dir: &Path, manifest_name: &str) -> Result<PathBuf, IoError> {
    let manifest_path = dir.join(manifest_name);
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["sample_id".to_string(), "file".to_string()];
    header.extend(dataset.phase_names().iter().cloned());
    let csv_err = |e: csv::Error| IoError::parse(&manifest_path, None, e.to_string());
    wtr.write_record(&header).map_err(csv_err)?;
    for s in dataset.samples() {
        let rel = PathBuf::from("spectra").join(format!("{}.xy", s.id));
        write_xy(&dir.join(&rel), dataset.grid().angles(), s.spectrum.intensities())?;
        let mut row = vec![s.id.clone(), rel.to_string_lossy().into_owned()];
        row.extend(s.composition.fractions().iter().map(|f| f.to_string()));
        wtr.write_record(&row).map_err(csv_err)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| IoError::parse(&manifest_path, None, e.to_string()))?;
    write_atomic(&manifest_path, &bytes)?;
    Ok(manifest_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::CoreError;

    fn write(dir: &Path, name: &str, text: &str) {
        std::fs::write(dir.join(name), text).unwrap();
    }

    fn three_sample_dir() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "a.xy", "10 1\n11 2\n12 3\n");
        write(dir.path(), "b.xy", "10,4\n11,5\n12,6\n");
        write(dir.path(), "c.xy", "# pure b\n10 0\n11 1\n12 0\n");
        write(
            dir.path(),
            "m.csv",
            "sample_id, file, calcite, quartz\nA, a.xy, 1, 0\nB, b.xy, 0.25, 0.75\n# comment\nC, c.xy, 0, 1\n",
        );
        dir
    }

    #[test]
    fn loads_consistent_manifest() {
        let dir = three_sample_dir();
        let ds = load_dataset(&dir.path().join("m.csv")).unwrap();
        assert_eq!(ds.num_samples(), 3);
        assert_eq!(&ds.phase_names()[..], ["calcite", "quartz"]);
        assert_eq!(ds.samples()[1].composition.fractions(), [0.25, 0.75]);
    }

    #[test]
    fn missing_file_named() {
        let dir = three_sample_dir();
        std::fs::remove_file(dir.path().join("b.xy")).unwrap();
        match load_dataset(&dir.path().join("m.csv")) {
            Err(IoError::MissingFile(p)) => assert!(p.ends_with("b.xy")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grid_mismatch_names_both_files() {
        let dir = three_sample_dir();
        write(dir.path(), "b.xy", "10 4\n11.5 5\n12 6\n");
        match load_dataset(&dir.path().join("m.csv")) {
            Err(IoError::GridMismatch { first, other }) => {
                assert!(first.ends_with("a.xy"));
                assert!(other.ends_with("b.xy"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_row_reports_line() {
        let dir = three_sample_dir();
        write(
            dir.path(),
            "m.csv",
            "sample_id,file,calcite,quartz\nA,a.xy,1,0\nB,b.xy,half,0.5\n",
        );
        match load_dataset(&dir.path().join("m.csv")) {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, Some(3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_composition_rejected() {
        let dir = three_sample_dir();
        write(
            dir.path(),
            "m.csv",
            "sample_id,file,calcite,quartz\nA,a.xy,0.5,0.6\n",
        );
        assert!(matches!(
            load_dataset(&dir.path().join("m.csv")),
            Err(IoError::Core(CoreError::BadComposition(_)))
        ));
    }

    #[test]
    fn write_then_load_is_identical() {
        let dir = three_sample_dir();
        let ds = load_dataset(&dir.path().join("m.csv")).unwrap();
        let out = tempfile::tempdir().unwrap();
        let manifest = write_dataset(&ds, out.path(), "manifest.csv").unwrap();
        assert_eq!(load_dataset(&manifest).unwrap(), ds);
    }
}

use std::fmt::Write as _;
use std::path::Path;

use super::{read_to_string, write_atomic, IoError};

/// Raw contents of an XY file.
#[derive(Debug, Clone, PartialEq)]
pub struct XyData {
    pub angles: Vec<f64>,
    pub intensities: Vec<f64>,
}

/// Parses XY text. `path` only labels errors.
pub fn read_xy(text: &str, path: &Path) -> Result<XyData, IoError> {
    let mut data = XyData {
        angles: Vec::new(),
        intensities: Vec::new(),
    };
    for (n, line) in text.lines().enumerate() {
        let line_no = Some(n as u64 + 1);
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != 2 {
            return Err(IoError::parse(
                path,
                line_no,
                format!("expected 2 columns, found {}", fields.len()),
            ));
        }
        let parse = |f: &str| {
            f.parse::<f64>()
                .map_err(|_| IoError::parse(path, line_no, format!("`{f}` is not a number")))
        };
        data.angles.push(parse(fields[0])?);
        data.intensities.push(parse(fields[1])?);
    }
    if data.angles.is_empty() {
        return Err(IoError::parse(path, None, "no data rows"));
    }
    Ok(data)
}

pub fn read_spectrum_file(path: &Path) -> Result<XyData, IoError> {
    read_xy(&read_to_string(path)?, path)
}

pub fn write_xy(path: &Path, angles: &[f64], intensities: &[f64]) -> Result<(), IoError> {
    let mut text = String::with_capacity(angles.len() * 24);
    text.push_str("# angle intensity\n");
    for (a, y) in angles.iter().zip(intensities) {
        let _ = writeln!(text, "{a} {y}");
    }
    write_atomic(path, text.as_bytes())
}

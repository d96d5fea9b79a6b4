//! Plot data for the paired phase-fraction bar chart and the per-phase
//! pattern curves, with minimal SVG renderings of both.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{write_atomic, IoError};
use crate::spectra::{Composition, PhaseLibrary, PhaseNames};

const ACTUAL_COLOR: &str = "#1f77b4";
const PREDICTED_COLOR: &str = "#d62728";
const OVERLAY_COLOR: &str = "#ff7f0e";

fn csv_bytes(path: &Path, rows: Vec<Vec<String>>) -> Result<Vec<u8>, IoError> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for row in rows {
        wtr.write_record(&row)
            .map_err(|e| IoError::parse(path, None, e.to_string()))?;
    }
    wtr.into_inner()
        .map_err(|e| IoError::parse(path, None, e.to_string()))
}

/// Predicted fractions, one row per sample, in manifest column order.
pub fn write_predictions(
    path: &Path,
    phase_names: &PhaseNames,
    predictions: &[(String, Composition)],
) -> Result<(), IoError> {
    let mut rows = Vec::with_capacity(predictions.len() + 1);
    let mut header = vec!["sample_id".to_string()];
    header.extend(phase_names.iter().cloned());
    rows.push(header);
    for (id, c) in predictions {
        let mut row = vec![id.clone()];
        row.extend(c.fractions().iter().map(f64::to_string));
        rows.push(row);
    }
    write_atomic(path, &csv_bytes(path, rows)?)
}

/// Long-format bar data: `sample_id,phase,actual,predicted`.
pub fn write_bar_data(
    path: &Path,
    ids: &[String],
    actuals: &[Composition],
    predictions: &[Composition],
) -> Result<(), IoError> {
    let mut rows = vec![vec![
        "sample_id".to_string(),
        "phase".to_string(),
        "actual".to_string(),
        "predicted".to_string(),
    ]];
    for ((id, a), p) in ids.iter().zip(actuals).zip(predictions) {
        for (j, name) in a.phase_names().iter().enumerate() {
            rows.push(vec![
                id.clone(),
                name.clone(),
                a.fractions()[j].to_string(),
                p.fractions()[j].to_string(),
            ]);
        }
    }
    write_atomic(path, &csv_bytes(path, rows)?)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// One small panel per sample with paired bars per phase: actual (blue)
/// and predicted (red), on a fixed 0–1 axis.
pub fn bar_chart_svg(ids: &[String], actuals: &[Composition], predictions: &[Composition]) -> String {
    let m = actuals.first().map_or(1, |c| c.len());
    let cols = 4usize;
    let rows = ids.len().div_ceil(cols).max(1);
    let (panel_w, panel_h, pad) = (240.0, 80.0, 20.0);
    let width = cols as f64 * (panel_w + pad) + pad;
    let height = rows as f64 * (panel_h + 2.0 * pad) + pad;
    let slot = panel_w / m as f64;
    let bar = slot * 0.4;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="10">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, ((id, a), p)) in ids.iter().zip(actuals).zip(predictions).enumerate() {
        let x0 = pad + (k % cols) as f64 * (panel_w + pad);
        let y0 = pad + (k / cols) as f64 * (panel_h + 2.0 * pad);
        let base = y0 + panel_h;
        let _ = writeln!(svg, r#"<text x="{x0}" y="{}">{}</text>"#, y0 - 4.0, escape(id));
        let _ = writeln!(
            svg,
            r#"<line x1="{x0}" y1="{base}" x2="{}" y2="{base}" stroke="black"/>"#,
            x0 + panel_w
        );
        for j in 0..m {
            let xs = x0 + j as f64 * slot + slot * 0.1;
            for (offset, v, color) in [
                (0.0, a.fractions()[j], ACTUAL_COLOR),
                (bar, p.fractions()[j], PREDICTED_COLOR),
            ] {
                let h = v * panel_h;
                let _ = writeln!(
                    svg,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#,
                    xs + offset,
                    base - h,
                    bar,
                    h
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Measured monophase samples drawn over an estimated pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOverlay {
    pub phase: usize,
    pub sample_id: String,
    pub intensities: Vec<f64>,
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Writes `phase_<j>_<name>.csv` per phase with columns `angle,estimated`
/// followed by one column per overlay sample. Returns the written paths.
pub fn write_phase_curves(
    dir: &Path,
    library: &PhaseLibrary,
    overlays: &[PhaseOverlay],
) -> Result<Vec<PathBuf>, IoError> {
    let mut written = Vec::new();
    for (j, name) in library.phase_names().iter().enumerate() {
        let path = dir.join(format!("phase_{}_{}.csv", j + 1, file_stem(name)));
        let mine: Vec<_> = overlays.iter().filter(|o| o.phase == j).collect();
        let mut header = vec!["angle".to_string(), "estimated".to_string()];
        header.extend(mine.iter().map(|o| o.sample_id.clone()));
        let mut rows = vec![header];
        for (i, angle) in library.grid().angles().iter().enumerate() {
            let mut row = vec![angle.to_string(), library.pattern(j)[i].to_string()];
            row.extend(mine.iter().map(|o| o.intensities[i].to_string()));
            rows.push(row);
        }
        write_atomic(&path, &csv_bytes(&path, rows)?)?;
        written.push(path);
    }
    Ok(written)
}

fn polyline(angles: &[f64], ys: &[f64], sx: impl Fn(f64) -> f64, sy: impl Fn(f64) -> f64) -> String {
    let mut pts = String::with_capacity(angles.len() * 16);
    for (a, y) in angles.iter().zip(ys) {
        let _ = write!(pts, "{:.2},{:.2} ", sx(*a), sy(*y));
    }
    pts
}

/// Stacked panels, one per phase: estimated pattern in blue, overlays in
/// orange, each panel scaled to its own maximum.
pub fn phase_curves_svg(library: &PhaseLibrary, overlays: &[PhaseOverlay]) -> String {
    let angles = library.grid().angles();
    let (lo, hi) = (angles[0], angles[angles.len() - 1]);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (width, panel_h, pad) = (900.0, 120.0, 24.0);
    let m = library.num_phases();
    let height = m as f64 * (panel_h + pad) + pad;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (j, name) in library.phase_names().iter().enumerate() {
        let y0 = pad + j as f64 * (panel_h + pad);
        let mine: Vec<_> = overlays.iter().filter(|o| o.phase == j).collect();
        let ymax = library
            .pattern(j)
            .iter()
            .chain(mine.iter().flat_map(|o| o.intensities.iter()))
            .fold(0.0_f64, |a, &b| a.max(b))
            .max(f64::MIN_POSITIVE);
        let sx = |a: f64| pad + (a - lo) / span * (width - 2.0 * pad);
        let sy = |v: f64| y0 + panel_h - v / ymax * panel_h;
        let _ = writeln!(svg, r#"<text x="{pad}" y="{}">{}</text>"#, y0 - 4.0, escape(name));
        for o in &mine {
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{OVERLAY_COLOR}" stroke-width="1" points="{}"/>"#,
                polyline(angles, &o.intensities, sx, sy)
            );
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{ACTUAL_COLOR}" stroke-width="1" points="{}"/>"#,
            polyline(angles, library.pattern(j), sx, sy)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::read_xy;
    use crate::spectra::{phase_names, AngleGrid};
    use std::sync::Arc;

    #[test]
    fn phase_curves_include_overlays() {
        let lib = PhaseLibrary::new(
            vec![vec![1.0, 2.0], vec![3.0, 0.5]],
            phase_names(["a b", "c"]),
            Arc::new(AngleGrid::new(vec![10.0, 20.0]).unwrap()),
        )
        .unwrap();
        let overlays = vec![PhaseOverlay {
            phase: 1,
            sample_id: "s9".into(),
            intensities: vec![2.5, 0.75],
        }];
        let dir = tempfile::tempdir().unwrap();
        let paths = write_phase_curves(dir.path(), &lib, &overlays).unwrap();
        assert!(paths[0].ends_with("phase_1_a_b.csv"));
        let text = std::fs::read_to_string(&paths[1]).unwrap();
        assert_eq!(text, "angle,estimated,s9\n10,3,2.5\n20,0.5,0.75\n");
        let svg = phase_curves_svg(&lib, &overlays);
        assert_eq!(svg.matches("<polyline").count(), 3);
        // csv columns parse back as numbers
        let first = std::fs::read_to_string(&paths[0]).unwrap().replace("angle,estimated\n", "");
        assert_eq!(read_xy(&first, &paths[0]).unwrap().intensities, [1.0, 2.0]);
    }

    #[test]
    fn bar_chart_has_two_bars_per_phase() {
        let names = phase_names(["a", "b", "c"]);
        let a = vec![Composition::pure(0, names.clone()); 5];
        let p = vec![Composition::new(vec![0.8, 0.1, 0.1], names).unwrap(); 5];
        let ids: Vec<String> = (0..5).map(|k| format!("s{k}")).collect();
        let svg = bar_chart_svg(&ids, &a, &p);
        assert_eq!(svg.matches("<rect x=").count(), 5 * 3 * 2);
    }
}

//! Detector sensitivity curves read from CSV for plotting next to a sweep.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub const OVERLAY_HEADER: [&str; 2] = ["frequency_hz", "characteristic_strain"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlayCurve {
    pub label: String,
    /// `(frequency_hz, characteristic_strain)`, strictly increasing in frequency.
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OverlayIngest {
    pub curve: OverlayCurve,
    pub warnings: Vec<String>,
}

fn parse_error(path: &str, line: u64, message: impl Into<String>) -> Error {
    Error::Parse { path: path.to_string(), line, message: message.into() }
}

/// Parses overlay CSV text. `name` labels the curve and the error messages.
pub fn parse_overlay(name: &str, text: &str) -> Result<OverlayIngest> {
    if text.trim().is_empty() {
        return Ok(OverlayIngest {
            curve: OverlayCurve { label: name.to_string(), points: Vec::new() },
            warnings: vec![format!("{name}: empty overlay file")],
        });
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| parse_error(name, 1, e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != OVERLAY_HEADER {
        return Err(parse_error(name, 1, format!("expected header {}", OVERLAY_HEADER.join(","))));
    }
    let mut points: Vec<(f64, f64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(name, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize, what: &str| -> Result<f64> {
            let v: f64 = record[i].parse().map_err(|_| parse_error(name, line, format!("bad {what} {:?}", &record[i])))?;
            if v.is_finite() && v > 0.0 {
                Ok(v)
            } else {
                Err(parse_error(name, line, format!("{what} must be positive, got {v}")))
            }
        };
        let point = (field(0, "frequency")?, field(1, "strain")?);
        if let Some(&(prev, _)) = points.last() {
            if point.0 <= prev {
                return Err(parse_error(
                    name,
                    line,
                    format!("frequency {} does not increase past {prev}", point.0),
                ));
            }
        }
        points.push(point);
    }
    let mut warnings = Vec::new();
    if points.is_empty() {
        warnings.push(format!("{name}: overlay has a header but no rows"));
    }
    Ok(OverlayIngest { curve: OverlayCurve { label: name.to_string(), points }, warnings })
}

/// Reads an overlay file; the curve is labelled with the file stem.
pub fn overlay_ingest(path: &Path) -> Result<OverlayIngest> {
    let text = std::fs::read_to_string(path)?;
    let label = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned());
    parse_overlay(&label, &text).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::Parse { path: path.display().to_string(), line, message },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_warns() {
        let got = parse_overlay("ligo", "").unwrap();
        assert!(got.curve.points.is_empty());
        assert_eq!(got.warnings.len(), 1);
    }

    #[test]
    fn well_formed_curve() {
        let got = parse_overlay("ligo", "frequency_hz,characteristic_strain\n10,1e-21\n100,3e-23\n").unwrap();
        assert_eq!(got.curve.points, vec![(10.0, 1e-21), (100.0, 3e-23)]);
        assert!(got.warnings.is_empty());
    }

    #[test]
    fn rejects_bad_rows_with_line_numbers() {
        let err = parse_overlay("x", "frequency_hz,characteristic_strain\n10,1e-21\n5,1e-22\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_overlay("x", "frequency_hz,characteristic_strain\n10,1e-21\n20,abc\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = parse_overlay("x", "frequency_hz,characteristic_strain\n10,1e-21,4\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_overlay("x", "freq,h\n10,1e-21\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }
}

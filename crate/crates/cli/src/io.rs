//! Curve CSV and JSON report files.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use anyhow::{ensure, Context, Result};
use hlmetric_core::Curve;
use serde::Serialize;

use crate::config::point;

/// One vertex per row, with a header `x0,x1,...`.
pub fn write_curve<W: Write>(curve: &Curve, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record((0..curve.dim()).map(|k| format!("x{k}")))?;
    for v in curve.vertices() {
        w.write_record(v.coords().iter().map(|c| c.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a curve written by [`write_curve`]; the header row is required.
pub fn read_curve<R: Read>(input: R) -> Result<Curve> {
    let mut r = csv::Reader::from_reader(input);
    let dim = r.headers()?.len();
    let mut vertices = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        ensure!(rec.len() == dim, "row {} has {} columns, expected {dim}", i + 1, rec.len());
        let coords = rec
            .iter()
            .map(|t| t.trim().parse::<f64>().with_context(|| format!("row {}: not a number: {t:?}", i + 1)))
            .collect::<Result<Vec<f64>>>()?;
        vertices.push(point(&coords)?);
    }
    Ok(Curve::new(vertices)?)
}

pub fn read_curve_file(path: &Path) -> Result<Curve> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_curve(f).with_context(|| format!("reading {}", path.display()))
}

pub fn write_curve_file(curve: &Curve, path: &Path) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_curve(curve, f)
}

/// Pretty JSON with a trailing newline, to `path` or stdout.
pub fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hlmetric_core::Point;

    #[test]
    fn curve_round_trip() {
        let c = Curve::new(vec![Point::xy(0.0, 0.1), Point::xy(-0.25, 1.0 / 3.0)]).unwrap();
        let mut buf = Vec::new();
        write_curve(&c, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x0,x1\n0,0.1\n"));
        assert_eq!(read_curve(buf.as_slice()).unwrap(), c);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(read_curve("x0,x1\n0,1\n2\n".as_bytes()).is_err());
        assert!(read_curve("x0,x1\n".as_bytes()).is_err());
        assert!(read_curve("x0,x1\n0,a\n".as_bytes()).is_err());
    }
}

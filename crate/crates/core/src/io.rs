//! Curve files and the plumbing shared by every artifact writer.
//!
//! Numbers are written in scientific notation with 17 significant digits,
//! which round-trips every finite `f64` exactly. Files are written to a
//! temporary sibling and renamed into place.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::curve::DiscreteCurve;
use crate::error::{Error, Result};
use crate::vec2::Vec2;

/// `x` with 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// `x` as a JSON number token with 17 significant digits; non-finite values
/// become `null`.
pub fn json_num(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() { fmt_num(x) } else { "null".to_owned() };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

pub fn json_nums(xs: &[f64]) -> Vec<Box<RawValue>> {
    xs.iter().map(|x| json_num(*x)).collect()
}

/// Writes `bytes` to `path` atomically, creating parent directories.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Serialises `value` as pretty JSON and writes it atomically.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::parse(path, e))?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
}

#[derive(Serialize)]
struct CurveOut {
    n: u32,
    points: Vec<[Box<RawValue>; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<Box<RawValue>>,
}

#[derive(Deserialize)]
struct CurveIn {
    n: u32,
    points: Vec<[f64; 2]>,
    #[serde(default)]
    eps: Option<f64>,
}

/// A curve file, optionally tagged with the similarity constant of a
/// self-similar profile.
#[derive(Debug, Clone)]
pub struct CurveFile {
    pub curve: DiscreteCurve,
    pub eps: Option<f64>,
}

/// JSON text `{"n": .., "points": [[x, y], ..]}` plus `"eps"` when given.
pub fn curve_to_json(curve: &DiscreteCurve, eps: Option<f64>) -> String {
    let out = CurveOut {
        n: curve.n(),
        points: curve.points().iter().map(|p| [json_num(p.x), json_num(p.y)]).collect(),
        eps: eps.map(json_num),
    };
    let mut text = serde_json::to_string(&out).expect("curve serialises");
    text.push('\n');
    text
}

pub fn curve_from_json(text: &str, path: &Path) -> Result<CurveFile> {
    let raw: CurveIn = serde_json::from_str(text).map_err(|e| Error::parse(path, e))?;
    let points = raw.points.into_iter().map(|[x, y]| Vec2::new(x, y)).collect();
    Ok(CurveFile { curve: DiscreteCurve::new(points, raw.n)?, eps: raw.eps })
}

pub fn write_curve_json(path: &Path, curve: &DiscreteCurve, eps: Option<f64>) -> Result<()> {
    atomic_write(path, curve_to_json(curve, eps).as_bytes())
}

pub fn read_curve_json(path: &Path) -> Result<CurveFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    curve_from_json(&text, path)
}

/// CSV text with header `phi,x,y`, one row per node.
pub fn curve_to_csv(curve: &DiscreteCurve) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["phi", "x", "y"]).expect("in-memory write");
    let h = curve.dphi();
    for (j, p) in curve.points().iter().enumerate() {
        w.write_record([fmt_num(h * j as f64), fmt_num(p.x), fmt_num(p.y)]).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Parses `phi,x,y` CSV. The file carries no dimension, so `n` is supplied.
pub fn curve_from_csv(bytes: &[u8], n: u32, path: &Path) -> Result<DiscreteCurve> {
    let mut r = csv::Reader::from_reader(bytes);
    let headers = r.headers().map_err(|e| Error::parse(path, e))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["phi", "x", "y"] {
        return Err(Error::parse(path, format!("expected header phi,x,y, found {}", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut points = Vec::new();
    for row in r.deserialize::<(f64, f64, f64)>() {
        let (_, x, y) = row.map_err(|e| Error::parse(path, e))?;
        points.push(Vec2::new(x, y));
    }
    DiscreteCurve::new(points, n)
}

pub fn write_curve_csv(path: &Path, curve: &DiscreteCurve) -> Result<()> {
    atomic_write(path, &curve_to_csv(curve))
}

pub fn read_curve_csv(path: &Path, n: u32) -> Result<DiscreteCurve> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    curve_from_csv(&bytes, n, path)
}

/// Reads a curve by extension (`.csv` or `.json`). `n` is required for CSV and
/// overrides the stored dimension for JSON when given.
pub fn read_curve(path: &Path, n: Option<u32>) -> Result<CurveFile> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => {
            let n = n.ok_or_else(|| Error::InvalidConfig("CSV curves need an explicit n".into()))?;
            Ok(CurveFile { curve: read_curve_csv(path, n)?, eps: None })
        }
        Some("json") => {
            let mut file = read_curve_json(path)?;
            if let Some(n) = n {
                file.curve = file.curve.with_n(n)?;
            }
            Ok(file)
        }
        _ => Err(Error::parse(path, "unknown curve format (expected .csv or .json)")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wobbly() -> DiscreteCurve {
        DiscreteCurve::from_fn(37, 3, |p| Vec2::from_polar(1.0 + 0.3 * (2.0 * p).sin(), p) * (1.0 / 3.0)).unwrap()
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let c = wobbly();
        let back = curve_from_csv(&curve_to_csv(&c), 3, Path::new("mem")).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let c = wobbly();
        let text = curve_to_json(&c, Some(std::f64::consts::PI / 7.0));
        let back = curve_from_json(&text, Path::new("mem")).unwrap();
        assert_eq!(back.curve, c);
        assert_eq!(back.eps, Some(std::f64::consts::PI / 7.0));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["n"], 3);
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(-2.5), "-2.5000000000000000e0");
        assert_eq!(json_num(f64::NAN).get(), "null");
    }

    #[test]
    fn files_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let c = wobbly();
        let csv_path = dir.path().join("sub/curve.csv");
        write_curve_csv(&csv_path, &c).unwrap();
        assert_eq!(read_curve(&csv_path, Some(3)).unwrap().curve, c);
        assert!(matches!(read_curve(&csv_path, None), Err(Error::InvalidConfig(_))));
        let json_path = dir.path().join("curve.json");
        write_curve_json(&json_path, &c, None).unwrap();
        let f = read_curve(&json_path, Some(2)).unwrap();
        assert_eq!(f.curve.n(), 2);
        assert_eq!(f.eps, None);
    }

    #[test]
    fn bad_header_rejected() {
        let err = curve_from_csv(b"a,b,c\n1,2,3\n", 2, Path::new("x.csv")).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }
}

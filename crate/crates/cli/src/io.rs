//! Curve files: JSON collections and single-curve CSV.

use std::fs;
use std::path::Path;

use frechet_kit::geom::Point;
use frechet_kit::PolygonalCurve;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}:{column}: {msg}")]
    Parse { path: String, line: usize, column: usize, msg: String },
    #[error("{path}: curve {curve} vertex {vertex} has {found} coordinates, expected {expected}")]
    DimensionMismatch {
        path: String,
        curve: usize,
        vertex: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    /// Picks the format from the file extension; anything but `.csv` is JSON.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Serialize, Deserialize)]
pub struct CurveFile {
    pub d: usize,
    pub curves: Vec<Vec<Vec<f64>>>,
}

/// Reads curves from `path`. Consecutive duplicate vertices are collapsed.
pub fn load_curves(path: &Path, format: Format) -> Result<Vec<PolygonalCurve>, LoadError> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: name.clone(),
        source,
    })?;
    let (d, rows) = match format {
        Format::Json => parse_json(&name, &text)?,
        Format::Csv => {
            let rows = parse_csv(&name, &text)?;
            (rows.first().map_or(0, |v| v.len()), vec![rows])
        }
    };
    build(&name, rows, d)
}

fn parse_json(name: &str, text: &str) -> Result<(usize, Vec<Vec<Vec<f64>>>), LoadError> {
    let f: CurveFile = serde_json::from_str(text).map_err(|e| LoadError::Parse {
        path: name.into(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    Ok((f.d, f.curves))
}

fn parse_csv(name: &str, text: &str) -> Result<Vec<Vec<f64>>, LoadError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let (line, column) = e.position().map_or((0, 0), |p| (p.line() as usize, 0));
            LoadError::Parse {
                path: name.into(),
                line,
                column,
                msg: e.to_string(),
            }
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let mut row = Vec::with_capacity(rec.len());
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| LoadError::Parse {
                path: name.into(),
                line,
                column: c + 1,
                msg: format!("not a number: {field:?}"),
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    Ok(rows)
}

fn build(name: &str, rows: Vec<Vec<Vec<f64>>>, d: usize) -> Result<Vec<PolygonalCurve>, LoadError> {
    if rows.is_empty() {
        return Err(LoadError::Invalid {
            path: name.into(),
            msg: "no curves".into(),
        });
    }
    let mut out = Vec::with_capacity(rows.len());
    for (ci, curve) in rows.into_iter().enumerate() {
        if curve.is_empty() {
            return Err(LoadError::Invalid {
                path: name.into(),
                msg: format!("curve {ci} has no vertices"),
            });
        }
        let mut pts: Vec<Point> = Vec::with_capacity(curve.len());
        for (vi, v) in curve.iter().enumerate() {
            if v.len() != d || d == 0 {
                return Err(LoadError::DimensionMismatch {
                    path: name.into(),
                    curve: ci,
                    vertex: vi,
                    expected: d,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(LoadError::Invalid {
                    path: name.into(),
                    msg: format!("curve {ci} vertex {vi} is not finite"),
                });
            }
            let p = Point::new(v);
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
        out.push(PolygonalCurve::new(pts).map_err(|e| LoadError::Invalid {
            path: name.into(),
            msg: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Writes curves in the JSON collection format.
pub fn curves_to_json(curves: &[PolygonalCurve]) -> CurveFile {
    CurveFile {
        d: curves.first().map_or(0, |c| c.dim()),
        curves: curves
            .iter()
            .map(|c| c.vertices().iter().map(|p| p.coords().to_vec()).collect())
            .collect(),
    }
}

/// Affine map applied to the input: `normalized = (x - offset) * scale`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Normalization {
    pub scale: f64,
    pub offset: Vec<f64>,
}

impl Normalization {
    pub fn identity(d: usize) -> Self {
        Normalization {
            scale: 1.0,
            offset: vec![0.0; d],
        }
    }

    /// Maps the common bounding box to one of unit diameter with its low
    /// corner at the origin.
    pub fn fit(curves: &[PolygonalCurve]) -> Self {
        let d = curves[0].dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for c in curves {
            let (a, b) = c.bbox();
            for k in 0..d {
                lo[k] = lo[k].min(a[k]);
                hi[k] = hi[k].max(b[k]);
            }
        }
        let diam = lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
        Normalization {
            scale: if diam > 0.0 { 1.0 / diam } else { 1.0 },
            offset: lo,
        }
    }

    pub fn apply(&self, c: &PolygonalCurve) -> PolygonalCurve {
        c.map_points(|p| {
            let v: Vec<f64> = p.coords().iter().zip(&self.offset).map(|(x, o)| (x - o) * self.scale).collect();
            Point::new(&v)
        })
    }

    pub fn invert(&self, c: &PolygonalCurve) -> PolygonalCurve {
        c.map_points(|p| {
            let v: Vec<f64> = p.coords().iter().zip(&self.offset).map(|(x, o)| x / self.scale + o).collect();
            Point::new(&v)
        })
    }
}

/// Loads every file, checks for a common dimension and normalizes jointly
/// when asked.
pub fn load_all(paths: &[impl AsRef<Path>], normalize: bool) -> Result<(Vec<PolygonalCurve>, Normalization), LoadError> {
    let mut curves = Vec::new();
    for p in paths {
        let p = p.as_ref();
        let cs = load_curves(p, Format::from_path(p))?;
        if let (Some(first), Some(c)) = (curves.first(), cs.first()) {
            let (a, b): (&PolygonalCurve, &PolygonalCurve) = (first, c);
            if a.dim() != b.dim() {
                return Err(LoadError::DimensionMismatch {
                    path: p.display().to_string(),
                    curve: 0,
                    vertex: 0,
                    expected: a.dim(),
                    found: b.dim(),
                });
            }
        }
        curves.extend(cs);
    }
    if curves.is_empty() {
        return Err(LoadError::Invalid {
            path: String::new(),
            msg: "no input files".into(),
        });
    }
    let norm = if normalize {
        Normalization::fit(&curves)
    } else {
        Normalization::identity(curves[0].dim())
    };
    let curves = if normalize { curves.iter().map(|c| norm.apply(c)).collect() } else { curves };
    Ok((curves, norm))
}

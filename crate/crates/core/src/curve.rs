use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Point, Segment};

/// A polygonal curve given by its vertex sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolygonalCurve {
    vertices: Vec<Point>,
}

impl PolygonalCurve {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let d = vertices.first().ok_or(Error::EmptyInput)?.dim();
        if d == 0 {
            return Err(Error::InvalidCurve("zero-dimensional vertex".into()));
        }
        for v in &vertices {
            if v.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: v.dim(),
                });
            }
            if !v.is_finite() {
                return Err(Error::InvalidCurve("non-finite coordinate".into()));
            }
        }
        Ok(PolygonalCurve { vertices })
    }

    pub fn from_coords(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows.iter().map(|r| Point::new(r)).collect())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Point> {
        self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].dim()
    }

    pub fn vertex(&self, i: usize) -> &Point {
        &self.vertices[i]
    }

    pub fn first(&self) -> &Point {
        &self.vertices[0]
    }

    pub fn last(&self) -> &Point {
        self.vertices.last().unwrap()
    }

    pub fn num_edges(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    /// Edge `a` joins vertices `a` and `a + 1` (zero-based).
    pub fn edge(&self, a: usize) -> Segment {
        Segment::new(self.vertices[a].clone(), self.vertices[a + 1].clone())
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        self.vertices.windows(2).map(|w| Segment::new(w[0].clone(), w[1].clone()))
    }

    pub fn length(&self) -> f64 {
        self.vertices.windows(2).map(|w| w[0].dist(&w[1])).sum()
    }

    pub fn max_edge_length(&self) -> f64 {
        self.vertices.windows(2).fold(0.0, |m, w| m.max(w[0].dist(&w[1])))
    }

    /// Vertices `a..=b` as a curve.
    pub fn subcurve(&self, a: usize, b: usize) -> PolygonalCurve {
        PolygonalCurve {
            vertices: self.vertices[a..=b].to_vec(),
        }
    }

    /// Drops vertices equal to their predecessor.
    pub fn dedup_consecutive(&self) -> PolygonalCurve {
        let mut v = self.vertices.clone();
        v.dedup();
        PolygonalCurve { vertices: v }
    }

    /// Inserts midpoints on the currently longest edges until the curve has
    /// `m` vertices. The Fréchet distance to any other curve is unchanged.
    pub fn pad_to(&self, m: usize) -> PolygonalCurve {
        let mut v = self.vertices.clone();
        if v.len() == 1 {
            while v.len() < m {
                v.push(v[0].clone());
            }
            return PolygonalCurve { vertices: v };
        }
        while v.len() < m {
            let mut best = 0;
            let mut best_len = -1.0;
            for a in 0..v.len() - 1 {
                let l = v[a].dist(&v[a + 1]);
                if l > best_len {
                    best_len = l;
                    best = a;
                }
            }
            let mid = v[best].midpoint(&v[best + 1]);
            v.insert(best + 1, mid);
        }
        PolygonalCurve { vertices: v }
    }

    /// Axis-aligned bounding box as `(lo, hi)`.
    pub fn bbox(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for v in &self.vertices {
            for k in 0..d {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    pub fn map_points(&self, f: impl Fn(&Point) -> Point) -> PolygonalCurve {
        PolygonalCurve {
            vertices: self.vertices.iter().map(f).collect(),
        }
    }
}

impl From<PolygonalCurve> for Vec<Point> {
    fn from(c: PolygonalCurve) -> Self {
        c.vertices
    }
}

use serde::{Deserialize, Serialize};

use super::lp::{self, LpOutcome};
use super::point::{Point, Vector};
use super::primitives::{clip_param_halfspace, Halfspace, Segment};
use super::TOL;
use crate::error::{Error, Result};

/// `conv(vertices) + cone(rays)`, optionally with a cached H-representation.
///
/// A region flagged universal is all of R^d regardless of its generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexRegion {
    pub vertices: Vec<Point>,
    pub rays: Vec<Vector>,
    pub halfspaces: Vec<Halfspace>,
    universal: bool,
    dim: usize,
    #[serde(skip)]
    aabb: Option<(Vec<f64>, Vec<f64>)>,
}

impl ConvexRegion {
    pub fn universal(dim: usize) -> Self {
        ConvexRegion {
            vertices: Vec::new(),
            rays: Vec::new(),
            halfspaces: Vec::new(),
            universal: true,
            dim,
            aabb: None,
        }
    }

    /// Axis-aligned box `[lo, hi]`; both representations are filled in.
    pub fn from_box(lo: &[f64], hi: &[f64]) -> Self {
        let d = lo.len();
        let mut vertices = Vec::with_capacity(1 << d);
        for mask in 0..(1usize << d) {
            let c: Vec<f64> = (0..d).map(|k| if mask >> k & 1 == 1 { hi[k] } else { lo[k] }).collect();
            vertices.push(Point::new(&c));
        }
        let mut halfspaces = Vec::with_capacity(2 * d);
        for k in 0..d {
            let mut e = Point::zeros(d);
            e[k] = 1.0;
            halfspaces.push(Halfspace {
                normal: e.clone(),
                offset: hi[k],
            });
            halfspaces.push(Halfspace {
                normal: -&e,
                offset: -lo[k],
            });
        }
        ConvexRegion {
            vertices,
            rays: Vec::new(),
            halfspaces,
            universal: false,
            dim: d,
            aabb: Some((lo.to_vec(), hi.to_vec())),
        }
    }

    /// Polytope given by its generating points only.
    pub fn from_points(points: Vec<Point>) -> Result<Self> {
        let dim = points.first().ok_or(Error::EmptyInput)?.dim();
        Ok(ConvexRegion {
            vertices: points,
            rays: Vec::new(),
            halfspaces: Vec::new(),
            universal: false,
            dim,
            aabb: None,
        })
    }

    pub fn from_segment(s: &Segment) -> Self {
        let vertices = if s.a == s.b {
            vec![s.a.clone()]
        } else {
            vec![s.a.clone(), s.b.clone()]
        };
        ConvexRegion {
            vertices,
            rays: Vec::new(),
            halfspaces: Vec::new(),
            universal: false,
            dim: s.dim(),
            aabb: None,
        }
    }

    pub(crate) fn with_parts(vertices: Vec<Point>, rays: Vec<Vector>, halfspaces: Vec<Halfspace>, dim: usize) -> Self {
        ConvexRegion {
            vertices,
            rays,
            halfspaces,
            universal: false,
            dim,
            aabb: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_universal(&self) -> bool {
        self.universal
    }

    pub fn is_bounded(&self) -> bool {
        !self.universal && self.rays.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        !self.universal && self.vertices.is_empty()
    }

    pub fn as_box(&self) -> Option<(&[f64], &[f64])> {
        self.aabb.as_ref().map(|(l, h)| (l.as_slice(), h.as_slice()))
    }

    /// Membership through the V-representation (an LP when needed).
    pub fn contains(&self, p: &Point) -> bool {
        if self.universal {
            return true;
        }
        if let Some((lo, hi)) = self.as_box() {
            return (0..self.dim).all(|k| p[k] >= lo[k] - TOL && p[k] <= hi[k] + TOL);
        }
        self.contains_vrep(p)
    }

    pub fn contains_vrep(&self, p: &Point) -> bool {
        if self.universal {
            return true;
        }
        if self.vertices.is_empty() {
            return false;
        }
        let nv = self.vertices.len();
        let nr = self.rays.len();
        let n = nv + nr;
        let d = self.dim;
        let mut a = vec![vec![0.0; n]; d + 1];
        let mut b = vec![0.0; d + 1];
        for k in 0..d {
            for (i, v) in self.vertices.iter().enumerate() {
                a[k][i] = v[k];
            }
            for (j, r) in self.rays.iter().enumerate() {
                a[k][nv + j] = r[k];
            }
            b[k] = p[k];
        }
        for i in 0..nv {
            a[d][i] = 1.0;
        }
        b[d] = 1.0;
        matches!(lp::solve(&a, &b, &vec![0.0; n]), LpOutcome::Optimal { .. })
    }

    /// Membership through the cached H-representation, if present.
    pub fn contains_hrep(&self, p: &Point) -> Option<bool> {
        if self.universal {
            return Some(true);
        }
        if self.halfspaces.is_empty() {
            return None;
        }
        Some(self.halfspaces.iter().all(|h| h.contains(p, TOL)))
    }

    /// Parameter interval of `s` inside the region.
    pub fn clip_param(&self, s: &Segment) -> Option<(f64, f64)> {
        if self.universal {
            return Some((0.0, 1.0));
        }
        if self.vertices.is_empty() {
            return None;
        }
        if self.rays.is_empty() && !self.halfspaces.is_empty() {
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for h in &self.halfspaces {
                let (a, b) = clip_param_halfspace(s, h, TOL)?;
                lo = lo.max(a);
                hi = hi.min(b);
                if lo > hi {
                    return None;
                }
            }
            return Some((lo, hi));
        }
        self.clip_param_lp(s)
    }

    fn clip_param_lp(&self, s: &Segment) -> Option<(f64, f64)> {
        // columns: t, slack(t <= 1), vertex weights, ray weights
        let nv = self.vertices.len();
        let nr = self.rays.len();
        let n = 2 + nv + nr;
        let d = self.dim;
        let dir = s.direction();
        let mut a = vec![vec![0.0; n]; d + 2];
        let mut b = vec![0.0; d + 2];
        for k in 0..d {
            a[k][0] = -dir[k];
            for (i, v) in self.vertices.iter().enumerate() {
                a[k][2 + i] = v[k];
            }
            for (j, r) in self.rays.iter().enumerate() {
                a[k][2 + nv + j] = r[k];
            }
            b[k] = s.a[k];
        }
        for i in 0..nv {
            a[d][2 + i] = 1.0;
        }
        b[d] = 1.0;
        a[d + 1][0] = 1.0;
        a[d + 1][1] = 1.0;
        b[d + 1] = 1.0;
        let mut c = vec![0.0; n];
        c[0] = 1.0;
        let t0 = match lp::solve(&a, &b, &c) {
            LpOutcome::Optimal { x, .. } => x[0],
            _ => return None,
        };
        c[0] = -1.0;
        let t1 = match lp::solve(&a, &b, &c) {
            LpOutcome::Optimal { x, .. } => x[0],
            _ => return None,
        };
        let (t0, t1) = (t0.clamp(0.0, 1.0), t1.clamp(0.0, 1.0));
        if t0 <= t1 {
            Some((t0, t1))
        } else {
            Some((t1, t1))
        }
    }

    /// Whether two bounded regions share a point.
    pub fn intersects(&self, other: &ConvexRegion) -> bool {
        if self.universal || other.universal {
            return !(self.is_empty() || other.is_empty());
        }
        if let (Some((l1, h1)), Some((l2, h2))) = (self.as_box(), other.as_box()) {
            return (0..self.dim).all(|k| l1[k] <= h2[k] + TOL && l2[k] <= h1[k] + TOL);
        }
        if other.vertices.len() <= 2 && other.rays.is_empty() && self.as_box().is_some() {
            let s = Segment::new(other.vertices[0].clone(), other.vertices.last().unwrap().clone());
            return self.clip_param(&s).is_some();
        }
        if self.vertices.len() <= 2 && self.rays.is_empty() && other.as_box().is_some() {
            return other.intersects(self);
        }
        // sum a_i r_i - sum b_j s_j = 0, sum a = 1, sum b = 1
        let (n1, n2) = (self.vertices.len(), other.vertices.len());
        let d = self.dim;
        let n = n1 + n2;
        let mut a = vec![vec![0.0; n]; d + 2];
        let mut b = vec![0.0; d + 2];
        for k in 0..d {
            for (i, v) in self.vertices.iter().enumerate() {
                a[k][i] = v[k];
            }
            for (j, v) in other.vertices.iter().enumerate() {
                a[k][n1 + j] = -v[k];
            }
        }
        for i in 0..n1 {
            a[d][i] = 1.0;
        }
        for j in 0..n2 {
            a[d + 1][n1 + j] = 1.0;
        }
        b[d] = 1.0;
        b[d + 1] = 1.0;
        matches!(lp::solve(&a, &b, &vec![0.0; n]), LpOutcome::Optimal { .. })
    }
}

/// `F(R, S)`: all `p` such that some segment from `p` to a point of `S` meets `R`.
///
/// Represented as `R + cone{r - s}` over vertex pairs; universal when `R` and
/// `S` intersect.
pub fn f_region(r: &ConvexRegion, s: &ConvexRegion) -> Result<ConvexRegion> {
    if r.is_empty() || s.is_empty() {
        return Err(Error::EmptyInput);
    }
    if r.intersects(s) {
        return Ok(ConvexRegion::universal(r.dim()));
    }
    let mut rays = Vec::with_capacity(r.vertices.len() * s.vertices.len());
    for beta in &r.vertices {
        for phi in &s.vertices {
            let g = beta - phi;
            if g.norm_sq() > 0.0 {
                rays.push(g);
            }
        }
    }
    Ok(ConvexRegion::with_parts(r.vertices.clone(), rays, Vec::new(), r.dim()))
}

pub fn clip_segment_convex(s: &Segment, region: &ConvexRegion) -> Option<Segment> {
    region.clip_param(s).map(|(t0, t1)| s.sub(t0, t1))
}

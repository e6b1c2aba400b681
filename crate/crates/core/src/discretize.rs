//! Grid cells around input vertices and the segment family parallel to the
//! edges of the tightest curve.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::curve::PolygonalCurve;
use crate::error::{Error, Result};
use crate::geom::{convex_hull, dist_point_box, ConvexRegion, Point, Segment};

pub type CellIndex = SmallVec<[i64; 4]>;

/// Which curve and vertex caused a cell to be generated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub curve: usize,
    pub vertex: usize,
}

/// Closed origin-anchored hypercube `prod [index_k * side, (index_k + 1) * side]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridCell {
    pub index: CellIndex,
    pub side: f64,
    pub provenance: Option<Provenance>,
}

impl PartialEq for GridCell {
    fn eq(&self, other: &Self) -> bool {
        self.side == other.side && self.index == other.index
    }
}

impl GridCell {
    pub fn new(index: CellIndex, side: f64) -> Self {
        GridCell {
            index,
            side,
            provenance: None,
        }
    }

    /// The cell containing `p` (ties go to the cell with the larger index).
    pub fn containing(p: &Point, side: f64) -> Self {
        GridCell::new(p.coords().iter().map(|c| (c / side).floor() as i64).collect(), side)
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn lo(&self) -> Vec<f64> {
        self.index.iter().map(|&i| i as f64 * self.side).collect()
    }

    pub fn hi(&self) -> Vec<f64> {
        self.index.iter().map(|&i| (i + 1) as f64 * self.side).collect()
    }

    pub fn center(&self) -> Point {
        Point::new(&self.index.iter().map(|&i| (i as f64 + 0.5) * self.side).collect::<Vec<_>>())
    }

    pub fn diameter(&self) -> f64 {
        self.side * (self.dim() as f64).sqrt()
    }

    pub fn vertices(&self) -> Vec<Point> {
        let d = self.dim();
        let (lo, hi) = (self.lo(), self.hi());
        (0..1usize << d)
            .map(|mask| Point::new(&(0..d).map(|k| if mask >> k & 1 == 1 { hi[k] } else { lo[k] }).collect::<Vec<_>>()))
            .collect()
    }

    pub fn region(&self) -> ConvexRegion {
        ConvexRegion::from_box(&self.lo(), &self.hi())
    }

    pub fn dist_to_point(&self, p: &Point) -> f64 {
        dist_point_box(p, &self.lo(), &self.hi())
    }

    /// Largest distance from `p` to a point of the cell.
    pub fn max_dist_to_point(&self, p: &Point) -> f64 {
        let mut s = 0.0;
        for (k, &i) in self.index.iter().enumerate() {
            let lo = i as f64 * self.side;
            let hi = lo + self.side;
            let e = (p[k] - lo).abs().max((p[k] - hi).abs());
            s += e * e;
        }
        s.sqrt()
    }
}

/// All closed cells of the grid with the given side meeting the closed ball.
pub fn grid_cells_of_ball(center: &Point, r: f64, side: f64) -> Vec<GridCell> {
    let d = center.dim();
    let reach = (r / side).ceil() as i64 + 1;
    let base: Vec<i64> = center.coords().iter().map(|c| (c / side).floor() as i64).collect();
    let slack = 1e-12 * (1.0 + r);
    let mut out = Vec::new();
    let mut idx: Vec<i64> = base.iter().map(|b| b - reach).collect();
    loop {
        let cell = GridCell::new(CellIndex::from_slice(&idx), side);
        if cell.dist_to_point(center) <= r + slack {
            out.push(cell);
        }
        // odometer increment
        let mut k = d;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if idx[k] < base[k] + reach {
                idx[k] += 1;
                for kk in k + 1..d {
                    idx[kk] = base[kk] - reach;
                }
                break;
            }
        }
    }
}

/// Deduplicated cells of one side length, in canonical index order.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct GridSet {
    pub cells: Vec<GridCell>,
    pub side: f64,
}

impl GridSet {
    fn from_map(map: BTreeMap<CellIndex, GridCell>, side: f64) -> Self {
        GridSet {
            cells: map.into_values().collect(),
            side,
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains_index(&self, index: &[i64]) -> bool {
        self.cells
            .binary_search_by(|c| c.index.as_slice().cmp(index))
            .is_ok()
    }
}

fn collect_cells(map: &mut BTreeMap<CellIndex, GridCell>, center: &Point, r: f64, side: f64, prov: Provenance) {
    for mut cell in grid_cells_of_ball(center, r, side) {
        cell.provenance = Some(prov);
        map.entry(cell.index.clone()).or_insert(cell);
    }
}

/// First grid family: one set per curve, side `eps * delta_i / l`, radius
/// `delta_i + sqrt(d) eps delta_i` around every vertex.
pub fn build_g1(curves: &[PolygonalCurve], deltas: &[f64], eps: f64, l: usize) -> Vec<GridSet> {
    curves
        .iter()
        .zip(deltas)
        .enumerate()
        .map(|(i, (c, &delta))| {
            let sd = (c.dim() as f64).sqrt();
            let side = eps * delta / l as f64;
            let r = delta + sd * eps * delta;
            let mut map = BTreeMap::new();
            for (a, v) in c.vertices().iter().enumerate() {
                collect_cells(&mut map, v, r, side, Provenance { curve: i, vertex: a });
            }
            GridSet::from_map(map, side)
        })
        .collect()
}

/// Second grid family: side `eps * delta_max`, radius `9 sqrt(d) delta_max`,
/// merged over all curves.
pub fn build_g2(curves: &[PolygonalCurve], deltas: &[f64], eps: f64) -> GridSet {
    let dmax = deltas.iter().cloned().fold(0.0, f64::max);
    let side = eps * dmax;
    let mut map = BTreeMap::new();
    for (i, c) in curves.iter().enumerate() {
        let r = 9.0 * (c.dim() as f64).sqrt() * dmax;
        for (a, v) in c.vertices().iter().enumerate() {
            collect_cells(&mut map, v, r, side, Provenance { curve: i, vertex: a });
        }
    }
    GridSet::from_map(map, side)
}

/// Segments grouped by the edge of the tightest curve they are parallel to.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SegmentFamily {
    pub groups: Vec<Vec<Segment>>,
}

impl SegmentFamily {
    pub fn len(&self) -> usize {
        self.groups.iter().map(|g| g.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Segment> {
        self.groups.iter().flatten()
    }

    /// `(group, index within group)` for a flat index.
    pub fn locate(&self, mut flat: usize) -> (usize, usize) {
        for (a, g) in self.groups.iter().enumerate() {
            if flat < g.len() {
                return (a, flat);
            }
            flat -= g.len();
        }
        panic!("segment index out of range");
    }

    pub fn get(&self, flat: usize) -> &Segment {
        let (a, j) = self.locate(flat);
        &self.groups[a][j]
    }
}

fn grid_vertices(cells: &[GridCell]) -> Vec<Point> {
    let mut seen: BTreeMap<CellIndex, ()> = BTreeMap::new();
    let mut out = Vec::new();
    let d = cells.first().map(|c| c.dim()).unwrap_or(0);
    for c in cells {
        for mask in 0..1usize << d {
            let idx: CellIndex = (0..d).map(|k| c.index[k] + (mask >> k & 1) as i64).collect();
            if seen.insert(idx.clone(), ()).is_none() {
                out.push(Point::new(&idx.iter().map(|&i| i as f64 * c.side).collect::<Vec<_>>()));
            }
        }
    }
    out
}

/// The segment family: for each edge `a` of `tau_min`, lines through the grid
/// vertices of the cells around `v_a`, parallel to the edge and clipped to the
/// hull of the cells around both endpoints.
///
/// A zero-length edge has no direction; its group then holds one point segment
/// per grid vertex.
pub fn build_l(tau_min: &PolygonalCurve, delta_min: f64, eps: f64) -> Result<SegmentFamily> {
    if tau_min.len() < 2 {
        return Err(Error::InvalidCurve("segment family needs at least two vertices".into()));
    }
    if !(delta_min > 0.0) || !(eps > 0.0) {
        return Err(Error::InvalidParameter("delta_min and eps must be positive".into()));
    }
    let side = eps * delta_min;
    let mut groups = Vec::with_capacity(tau_min.num_edges());
    for a in 0..tau_min.num_edges() {
        let (va, vb) = (tau_min.vertex(a), tau_min.vertex(a + 1));
        let first = grid_cells_of_ball(va, delta_min, side);
        let second = grid_cells_of_ball(vb, delta_min, side);
        let xs = grid_vertices(&first);
        let mut hull_pts = xs.clone();
        hull_pts.extend(grid_vertices(&second));
        let hull = convex_hull(&hull_pts)?;
        let dir = vb - va;
        let len = dir.norm();
        let mut group = Vec::with_capacity(xs.len());
        if len <= 1e-15 {
            for x in xs {
                group.push(Segment::point(x));
            }
            groups.push(group);
            continue;
        }
        let u = &dir * (1.0 / len);
        let reach = len + 4.0 * delta_min + 4.0 * side * (va.dim() as f64).sqrt();
        for x in xs {
            let line = Segment::new(x.add_scaled(&u, -reach), x.add_scaled(&u, reach));
            if let Some((t0, t1)) = hull.clip_param(&line) {
                let mut s = line.sub(t0, t1);
                // keep exact parallelism: rebuild from the anchor
                let (p0, p1) = ((t0 - 0.5) * 2.0 * reach, (t1 - 0.5) * 2.0 * reach);
                s.a = x.add_scaled(&u, p0);
                s.b = x.add_scaled(&u, p1);
                group.push(s);
            }
        }
        groups.push(group);
    }
    Ok(SegmentFamily { groups })
}

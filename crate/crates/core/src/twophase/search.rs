//! Depth-first search over configurations, built vertex by vertex.
//!
//! The order per vertex `k` is: anchor cell (refined from coarse index boxes),
//! carrier segment, partition cuts, then the cell pair of edge `k - 1`, after
//! which the locus of vertex `k - 1` is closed and that of `k` opened. Branches
//! are cut when no curve with vertices in the current loci can be within
//! `delta_i + sqrt(d) eps delta_min` of every input curve, which keeps every
//! configuration produced by snapping an exact solution.

use std::collections::HashMap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::{backward_extract, begin_vertex, check_3b, close_vertex, verify_candidate, GammaChain, QInstance, Radii};
use crate::config::{anchor_within, check_constraint1_edge, constraint1_radius, Configuration, PartitionFn};
use crate::curve::PolygonalCurve;
use crate::discretize::{build_l, CellIndex, GridCell, SegmentFamily};
use crate::error::Result;
use crate::geom::{clip_param_cylinder, f_region, ConvexRegion, Cylinder, Point, Segment, TOL};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SearchLimits {
    pub node_budget: u64,
}

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Found {
        curve: PolygonalCurve,
        config: Box<Configuration>,
        chain: GammaChain,
    },
    Exhausted,
    OutOfBudget,
}

enum Flow {
    Continue,
    Found(PolygonalCurve, Box<Configuration>, GammaChain),
    Stop,
}

macro_rules! propagate {
    ($e:expr) => {
        match $e {
            Flow::Continue => {}
            other => return other,
        }
    };
}

/// Enclosing ball of a region, used for cheap distance bounds.
#[derive(Clone, Debug)]
struct Blob {
    c: Point,
    h: f64,
}

impl Blob {
    fn of_segment(s: &Segment) -> Blob {
        Blob {
            c: s.midpoint(),
            h: 0.5 * s.length(),
        }
    }

    fn of_box(lo: &[f64], hi: &[f64]) -> Blob {
        let c: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
        let h = lo.iter().zip(hi).map(|(a, b)| 0.25 * (b - a) * (b - a)).sum::<f64>().sqrt();
        Blob { c: Point::new(&c), h }
    }

    /// Lower bound on the distance from `x` to the region.
    fn lb(&self, x: &Point) -> f64 {
        x.dist(&self.c) - self.h
    }
}

fn seg_point_dist(a: &Point, b: &Point, x: &Point) -> f64 {
    Segment::new(a.clone(), b.clone()).dist_to_point(x)
}

/// Lower bound on the distance from `x` to the hull of two regions.
fn hull_lb(b1: &Blob, b2: &Blob, x: &Point) -> f64 {
    seg_point_dist(&b1.c, &b2.c, x) - b1.h.max(b2.h)
}

/// Parallel segments of one group, sorted by offset along a fixed normal.
struct SegGroup {
    normal: Point,
    keys: Vec<(f64, usize)>,
}

struct SegIndex {
    groups: Vec<SegGroup>,
}

impl SegIndex {
    fn new(fam: &SegmentFamily, tau_min: &PolygonalCurve) -> Self {
        let d = tau_min.dim();
        let mut flat = 0;
        let mut groups = Vec::new();
        for (a, g) in fam.groups.iter().enumerate() {
            let dir = tau_min.vertex(a + 1) - tau_min.vertex(a);
            let len = dir.norm();
            let mut normal = Point::zeros(d);
            if len > 1e-15 && d > 1 {
                let u = &dir * (1.0 / len);
                let kmin = (0..d).min_by(|&x, &y| u[x].abs().partial_cmp(&u[y].abs()).unwrap()).unwrap();
                let mut e = Point::zeros(d);
                e[kmin] = 1.0;
                let p = e.add_scaled(&u, -u[kmin]);
                normal = &p * (1.0 / p.norm());
            } else {
                normal[0] = 1.0;
            }
            let mut keys: Vec<(f64, usize)> = g
                .iter()
                .enumerate()
                .map(|(j, s)| (normal.dot(&s.a), flat + j))
                .collect();
            keys.sort_by(|x, y| x.partial_cmp(y).unwrap());
            flat += g.len();
            groups.push(SegGroup { normal, keys });
        }
        SegIndex { groups }
    }

    /// Flat ids of segments that may pass within `r` of `x`.
    fn near(&self, x: &Point, r: f64, out: &mut Vec<usize>) {
        for g in &self.groups {
            let k = g.normal.dot(x);
            let lo = g.keys.partition_point(|e| e.0 < k - r - 1e-12);
            for e in &g.keys[lo..] {
                if e.0 > k + r + 1e-12 {
                    break;
                }
                out.push(e.1);
            }
        }
    }
}

#[derive(Clone, Debug)]
struct IdxBox {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl IdxBox {
    fn coords(&self, side: f64) -> (Vec<f64>, Vec<f64>) {
        (
            self.lo.iter().map(|&i| i as f64 * side).collect(),
            self.hi.iter().map(|&i| (i + 1) as f64 * side).collect(),
        )
    }

    fn is_cell(&self) -> bool {
        self.lo == self.hi
    }

    fn split(&self) -> [IdxBox; 2] {
        let k = (0..self.lo.len()).max_by_key(|&k| self.hi[k] - self.lo[k]).unwrap();
        let mid = self.lo[k] + (self.hi[k] - self.lo[k]) / 2;
        let mut a = self.clone();
        let mut b = self.clone();
        a.hi[k] = mid;
        b.lo[k] = mid + 1;
        [a, b]
    }
}

fn index_box_of_ball(c: &Point, r: f64, side: f64) -> IdxBox {
    IdxBox {
        lo: c.coords().iter().map(|x| ((x - r) / side).floor() as i64).collect(),
        hi: c.coords().iter().map(|x| ((x + r) / side).floor() as i64).collect(),
    }
}

fn box_dist(x: &Point, lo: &[f64], hi: &[f64]) -> f64 {
    crate::geom::dist_point_box(x, lo, hi)
}

struct State {
    cfg: Configuration,
    cuts: Vec<Vec<usize>>,
    blobs: Vec<Blob>,
    partial: Vec<Option<Segment>>,
    closed: Vec<Option<Segment>>,
}

pub(crate) struct Searcher<'a> {
    inst: &'a QInstance,
    verify: &'a QInstance,
    l: usize,
    eps: f64,
    rad: Radii,
    n: usize,
    m: usize,
    r_match: Vec<f64>,
    r1: Vec<f64>,
    r3a: Vec<f64>,
    segs: SegmentFamily,
    index: SegIndex,
    seg_reach: f64,
    g1_side: Vec<f64>,
    g1_rad: Vec<f64>,
    g2_side: f64,
    g2_rad: f64,
    final_blob: Blob,
    verify_slack: f64,
    null_cache: HashMap<Vec<usize>, Rc<Vec<(f64, usize, Segment)>>>,
    nodes: u64,
    budget: u64,
}

impl<'a> Searcher<'a> {
    /// Search for `l`-vertex curves on `inst`, with grid parameter `eps`;
    /// candidates are verified against `verify`.
    pub fn new(inst: &'a QInstance, verify: &'a QInstance, l: usize, eps: f64, budget: u64) -> Result<Self> {
        let d = inst.dim();
        let sd = (d as f64).sqrt();
        let dmax = inst.delta_max();
        let dmin = inst.delta_min();
        let tau_min = &inst.curves[inst.argmin()];
        let segs = build_l(tau_min, dmin, eps)?;
        let index = SegIndex::new(&segs, tau_min);
        let seg_reach = segs.iter().fold(0.0f64, |m, s| m.max(s.length()));
        let th = &inst.thresholds;
        let r_match = th.iter().map(|&t| t + sd * eps * dmin + 1e-9 * (1.0 + t)).collect();
        let r1 = th.iter().map(|&t| constraint1_radius(t, eps, d)).collect();
        let r3a: Vec<f64> = th.iter().map(|&t| t + 2.0 * sd * eps * dmax).collect();
        let g1_side = th.iter().map(|&t| eps * t / l as f64).collect();
        let g1_rad = th.iter().map(|&t| t + sd * eps * t).collect();
        let g2_side = eps * dmax;
        let g2_rad = 9.0 * sd * dmax;
        // enclosing ball of all cells that can serve as the last anchor
        let last0 = inst.curves[0].last();
        let final_blob = Blob {
            c: last0.clone(),
            h: r3a[0] + g2_side * sd,
        };
        Ok(Searcher {
            inst,
            verify,
            l,
            eps,
            rad: Radii::of(inst, eps),
            n: inst.n(),
            m: inst.m(),
            r_match,
            r1,
            r3a,
            segs,
            index,
            seg_reach,
            g1_side,
            g1_rad,
            g2_side,
            g2_rad,
            final_blob,
            verify_slack: 4.0 * sd * eps,
            null_cache: HashMap::new(),
            nodes: 0,
            budget,
        })
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        self.nodes <= self.budget
    }

    pub fn run(&mut self) -> SearchOutcome {
        let l = self.l;
        let d = self.inst.dim();
        let dummy_cell = GridCell::new(CellIndex::from_elem(0, d), 1.0);
        let dummy_seg = Segment::point(Point::zeros(d));
        let mut st = State {
            cfg: Configuration {
                l,
                partitions: (0..self.n).map(|_| PartitionFn { values: vec![0; self.m] }).collect(),
                cells: vec![(dummy_cell.clone(), dummy_cell); l - 1],
                segments: vec![dummy_seg.clone(); l],
                segment_ids: vec![0; l],
                anchors: vec![None; l],
            },
            cuts: (0..self.n).map(|_| vec![0; l + 1]).collect(),
            blobs: vec![Blob { c: Point::zeros(d), h: 0.0 }; l],
            partial: vec![None; l],
            closed: vec![None; l],
        };
        match self.level(&mut st, 1) {
            Flow::Continue => SearchOutcome::Exhausted,
            Flow::Stop => SearchOutcome::OutOfBudget,
            Flow::Found(curve, config, chain) => SearchOutcome::Found { curve, config, chain },
        }
    }

    // ---- pruning -------------------------------------------------------

    /// Whether each curve admits a monotone assignment of its vertices to the
    /// loci `blobs[0..k]` (and the final anchor region when `k = l - 1`).
    fn dp_ok(&self, blobs: &[Blob]) -> bool {
        let k = blobs.len();
        let mut regions: Vec<&Blob> = blobs.iter().collect();
        let complete = if k == self.l {
            true
        } else if k + 1 == self.l {
            regions.push(&self.final_blob);
            true
        } else {
            false
        };
        let m = self.m;
        for (i, curve) in self.inst.curves.iter().enumerate() {
            let r = self.r_match[i];
            let v = curve.vertices();
            let edge_near = |e: usize, b: &Blob| seg_point_dist(&v[e], &v[e + 1], &b.c) - b.h <= r;
            let mut reach = vec![false; m - 1];
            let mut all = true;
            for e in 0..m - 1 {
                all = all && regions[0].lb(&v[e]) <= r;
                reach[e] = all && edge_near(e, regions[0]);
            }
            for j in 1..regions.len() {
                let (b1, b2) = (regions[j - 1], regions[j]);
                let mut alive = false;
                let mut next = vec![false; m - 1];
                for e in 0..m - 1 {
                    alive = reach[e] || (alive && hull_lb(b1, b2, &v[e]) <= r);
                    next[e] = alive && edge_near(e, b2);
                }
                reach = next;
            }
            let ok = if complete {
                let last = regions.last().unwrap();
                let mut suffix = true;
                let mut found = false;
                for e in (0..m - 1).rev() {
                    suffix = suffix && last.lb(&v[e + 1]) <= r;
                    if suffix && reach[e] {
                        found = true;
                        break;
                    }
                }
                found
            } else {
                reach.iter().any(|&x| x)
            };
            if !ok {
                return false;
            }
        }
        true
    }

    fn g1_member(&self, i: usize, cell: &GridCell) -> bool {
        let r = self.g1_rad[i] + 1e-12 * (1.0 + self.g1_rad[i]);
        self.inst.curves[i].vertices().iter().any(|v| cell.dist_to_point(v) <= r)
    }

    fn g2_member(&self, cell: &GridCell) -> bool {
        let r = self.g2_rad + 1e-12 * (1.0 + self.g2_rad);
        self.inst.curves.iter().any(|c| c.vertices().iter().any(|v| cell.dist_to_point(v) <= r))
    }

    // ---- anchors -------------------------------------------------------

    fn level(&mut self, st: &mut State, k: usize) -> Flow {
        let l = self.l;
        let side = self.g2_side;
        let root = if k == 1 {
            index_box_of_ball(self.inst.curves[0].first(), self.r3a[0], side)
        } else if k == l {
            index_box_of_ball(self.inst.curves[0].last(), self.r3a[0], side)
        } else {
            let mut lo = vec![f64::INFINITY; self.inst.dim()];
            let mut hi = vec![f64::NEG_INFINITY; self.inst.dim()];
            for c in &self.inst.curves {
                let (a, b) = c.bbox();
                for t in 0..lo.len() {
                    lo[t] = lo[t].min(a[t] - self.g2_rad);
                    hi[t] = hi[t].max(b[t] + self.g2_rad);
                }
            }
            IdxBox {
                lo: lo.iter().map(|x| (x / side).floor() as i64).collect(),
                hi: hi.iter().map(|x| (x / side).floor() as i64).collect(),
            }
        };
        let targets = self.anchor_targets(st, k);
        propagate!(self.anchor_box(st, k, root, &targets));
        if k > 1 && k < l {
            propagate!(self.null_anchor(st, k));
        }
        Flow::Continue
    }

    /// Per-curve vertices an anchor for vertex `k` should be close to.
    fn anchor_targets(&self, st: &State, k: usize) -> Vec<Vec<usize>> {
        let m = self.m;
        (0..self.n)
            .map(|i| {
                if k == 1 {
                    return vec![0];
                }
                if k == self.l {
                    return vec![m - 1];
                }
                let from = st.cuts[i][k - 1].min(m - 1);
                let curve = &self.inst.curves[i];
                let prev = st.partial[k - 2].as_ref();
                let far: Vec<usize> = (from..m)
                    .filter(|&a| prev.map_or(true, |g| g.dist_to_point(curve.vertex(a)) > self.r_match[i]))
                    .collect();
                if far.is_empty() {
                    (from..m).collect()
                } else {
                    far
                }
            })
            .collect()
    }

    fn box_score(&self, lo: &[f64], hi: &[f64], targets: &[Vec<usize>]) -> f64 {
        let mut s: f64 = 0.0;
        for (i, t) in targets.iter().enumerate() {
            let c = &self.inst.curves[i];
            let best = t.iter().map(|&a| box_dist(c.vertex(a), lo, hi)).fold(f64::INFINITY, f64::min);
            s = s.max(best / self.inst.thresholds[i]);
        }
        s
    }

    fn anchor_box(&mut self, st: &mut State, k: usize, b: IdxBox, targets: &[Vec<usize>]) -> Flow {
        if !self.tick() {
            return Flow::Stop;
        }
        let l = self.l;
        let (lo, hi) = b.coords(self.g2_side);
        let curves = &self.inst.curves;
        if k == 1 || k == l {
            for (i, c) in curves.iter().enumerate() {
                if k == 1 && box_dist(c.first(), &lo, &hi) > self.r3a[i] {
                    return Flow::Continue;
                }
                if k == l && box_dist(c.last(), &lo, &hi) > self.r3a[i] {
                    return Flow::Continue;
                }
            }
        } else {
            let near = curves.iter().any(|c| c.vertices().iter().any(|v| box_dist(v, &lo, &hi) <= self.g2_rad));
            if !near {
                return Flow::Continue;
            }
        }
        st.blobs[k - 1] = Blob::of_box(&lo, &hi);
        if !self.dp_ok(&st.blobs[..k]) {
            return Flow::Continue;
        }
        if b.is_cell() {
            let cell = GridCell::new(CellIndex::from_slice(&b.lo), self.g2_side);
            let ok = if k == 1 || k == l {
                (k != 1 || anchor_within(&cell, curves, &self.inst.thresholds, self.eps, |c| c.first()))
                    && (k != l || anchor_within(&cell, curves, &self.inst.thresholds, self.eps, |c| c.last()))
            } else {
                self.g2_member(&cell)
            };
            if !ok {
                return Flow::Continue;
            }
            return self.with_anchor(st, k, cell);
        }
        let mut kids: Vec<(f64, IdxBox)> = b
            .split()
            .into_iter()
            .map(|c| {
                let (lo, hi) = c.coords(self.g2_side);
                (self.box_score(&lo, &hi, targets), c)
            })
            .collect();
        kids.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        for (_, kid) in kids {
            propagate!(self.anchor_box(st, k, kid, targets));
        }
        Flow::Continue
    }

    fn with_anchor(&mut self, st: &mut State, k: usize, cell: GridCell) -> Flow {
        let region = cell.region();
        let center = cell.center();
        let mut ids = Vec::new();
        self.index.near(&center, 0.5 * cell.diameter(), &mut ids);
        let mut cands: Vec<(f64, usize, Segment)> = Vec::new();
        for id in ids {
            let s = self.segs.get(id);
            if let Some((t0, t1)) = region.clip_param(s) {
                let piece = s.sub(t0, t1);
                cands.push((piece.dist_to_point(&center), id, piece));
            }
        }
        if cands.is_empty() {
            return Flow::Continue;
        }
        cands.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        st.cfg.anchors[k - 1] = Some(cell);
        for (_, id, piece) in cands {
            if !self.tick() {
                return Flow::Stop;
            }
            st.blobs[k - 1] = Blob::of_segment(&piece);
            if !self.dp_ok(&st.blobs[..k]) {
                continue;
            }
            st.cfg.segments[k - 1] = self.segs.get(id).clone();
            st.cfg.segment_ids[k - 1] = id;
            st.partial[k - 1] = Some(piece);
            propagate!(self.with_cuts(st, k));
        }
        Flow::Continue
    }

    fn null_anchor(&mut self, st: &mut State, k: usize) -> Flow {
        st.cfg.anchors[k - 1] = None;
        // every curve must have an edge serving vertex k
        let opts: Vec<Vec<usize>> = (0..self.n)
            .map(|i| {
                let from = st.cuts[i][k - 1].max(1);
                (from..self.m).collect()
            })
            .collect();
        if opts.iter().any(|o| o.is_empty()) {
            return Flow::Continue;
        }
        let mut pick = vec![0usize; self.n];
        loop {
            if !self.tick() {
                return Flow::Stop;
            }
            let cut: Vec<usize> = (0..self.n).map(|i| opts[i][pick[i]]).collect();
            propagate!(self.null_with_cuts(st, k, &cut));
            let mut t = self.n;
            loop {
                if t == 0 {
                    return Flow::Continue;
                }
                t -= 1;
                pick[t] += 1;
                if pick[t] < opts[t].len() {
                    break;
                }
                pick[t] = 0;
            }
        }
    }

    fn null_with_cuts(&mut self, st: &mut State, k: usize, cut: &[usize]) -> Flow {
        let cands = match self.null_cache.get(cut) {
            Some(c) => c.clone(),
            None => {
                let c = Rc::new(self.null_pieces(cut));
                self.null_cache.insert(cut.to_vec(), c.clone());
                c
            }
        };
        for (_, id, piece) in cands.iter() {
            if !self.tick() {
                return Flow::Stop;
            }
            st.blobs[k - 1] = Blob::of_segment(piece);
            if !self.dp_ok(&st.blobs[..k]) {
                continue;
            }
            st.cfg.segments[k - 1] = self.segs.get(*id).clone();
            st.cfg.segment_ids[k - 1] = *id;
            st.partial[k - 1] = Some(piece.clone());
            if !self.apply_cuts(st, k, cut) {
                continue;
            }
            propagate!(self.after_cuts(st, k));
        }
        Flow::Continue
    }

    /// Pieces of family segments inside every cylinder around the serving
    /// edges picked by `cut`, nearest to the first cylinder's centre first.
    fn null_pieces(&self, cut: &[usize]) -> Vec<(f64, usize, Segment)> {
        let cyls: Vec<Cylinder> = (0..self.n)
            .map(|i| Cylinder {
                axis: self.inst.curves[i].edge(cut[i] - 1),
                radius: self.rad.rcyl(self.inst.thresholds[i]),
            })
            .collect();
        let c0 = &cyls[0];
        let mut ids = Vec::new();
        self.index
            .near(&c0.axis.midpoint(), 0.5 * c0.axis.length() + c0.radius + self.seg_reach, &mut ids);
        let mut cands: Vec<(f64, usize, Segment)> = Vec::new();
        'seg: for id in ids {
            let mut piece = self.segs.get(id).clone();
            for c in &cyls {
                match clip_param_cylinder(&piece, c, TOL) {
                    Some((t0, t1)) => piece = piece.sub(t0, t1),
                    None => continue 'seg,
                }
            }
            // a null anchor sits outside every second-grid cell
            let covered = self.inst.curves.iter().any(|c| {
                c.vertices()
                    .iter()
                    .any(|v| v.dist(&piece.a) <= self.g2_rad - 1e-9 && v.dist(&piece.b) <= self.g2_rad - 1e-9)
            });
            if covered {
                continue;
            }
            let key = piece.midpoint().dist(&c0.axis.midpoint());
            cands.push((key, id, piece));
        }
        cands.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        cands
    }

    // ---- partitions ----------------------------------------------------

    /// Largest admissible cut for curve `i` at vertex `k`: every vertex newly
    /// assigned to edge `k - 1` must be near that edge's loci.
    fn cut_range(&self, st: &State, i: usize, k: usize) -> (usize, usize) {
        let from = st.cuts[i][k - 1];
        let curve = &self.inst.curves[i];
        let r = self.r_match[i];
        let mut s = from;
        while s < self.m {
            let v = curve.vertex(s);
            let ok = if k == 1 {
                st.blobs[0].lb(v) <= r
            } else {
                hull_lb(&st.blobs[k - 2], &st.blobs[k - 1], v) <= r
            };
            if !ok {
                break;
            }
            s += 1;
        }
        (from, s)
    }

    /// Preferred cut: first vertex beyond the current locus along the edge.
    fn natural_cut(&self, st: &State, i: usize, k: usize, lo: usize, hi: usize) -> usize {
        if k == 1 {
            return hi;
        }
        let p = &st.blobs[k - 2].c;
        let q = &st.blobs[k - 1].c;
        let dir = q - p;
        let len2 = dir.norm_sq();
        let curve = &self.inst.curves[i];
        for s in lo..hi {
            let t = if len2 > 0.0 { (curve.vertex(s) - p).dot(&dir) / len2 } else { 1.0 };
            if t > 1.0 {
                return s;
            }
        }
        hi
    }

    fn apply_cuts(&self, st: &mut State, k: usize, cut: &[usize]) -> bool {
        for i in 0..self.n {
            let (lo, hi) = self.cut_range(st, i, k);
            if cut[i] < lo || cut[i] > hi {
                return false;
            }
        }
        for i in 0..self.n {
            self.set_cut(st, i, k, cut[i]);
        }
        true
    }

    fn set_cut(&self, st: &mut State, i: usize, k: usize, s: usize) {
        let from = st.cuts[i][k - 1];
        let vals = &mut st.cfg.partitions[i].values;
        for v in vals.iter_mut().take(s).skip(from) {
            *v = k - 1;
        }
        for v in vals.iter_mut().skip(s) {
            *v = k.min(self.l - 1);
        }
        st.cuts[i][k] = s;
    }

    fn with_cuts(&mut self, st: &mut State, k: usize) -> Flow {
        let m = self.m;
        let mut opts: Vec<Vec<usize>> = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let (lo, hi) = self.cut_range(st, i, k);
            if k == self.l {
                if hi < m {
                    return Flow::Continue;
                }
                opts.push(vec![m]);
                continue;
            }
            let lo = lo.max(1);
            if lo > hi {
                return Flow::Continue;
            }
            let nat = self.natural_cut(st, i, k, lo, hi);
            let mut o: Vec<usize> = (lo..=hi).collect();
            o.sort_by_key(|&s| ((s as i64 - nat as i64).abs(), s < nat));
            opts.push(o);
        }
        let mut pick = vec![0usize; self.n];
        loop {
            if !self.tick() {
                return Flow::Stop;
            }
            for i in 0..self.n {
                self.set_cut(st, i, k, opts[i][pick[i]]);
            }
            propagate!(self.after_cuts(st, k));
            let mut t = self.n;
            loop {
                if t == 0 {
                    return Flow::Continue;
                }
                t -= 1;
                pick[t] += 1;
                if pick[t] < opts[t].len() {
                    break;
                }
                pick[t] = 0;
            }
        }
    }

    fn after_cuts(&mut self, st: &mut State, k: usize) -> Flow {
        if k == 1 {
            let res = begin_vertex(self.inst, &self.rad, &st.cfg, 1, None);
            let Ok(g) = res else { return Flow::Continue };
            st.partial[0] = Some(g.clone());
            st.blobs[0] = Blob::of_segment(&g);
            if !self.dp_ok(&st.blobs[..1]) {
                return Flow::Continue;
            }
            if self.l == 1 {
                return self.leaf(st, g);
            }
            return self.level(st, 2);
        }
        if st.cfg.anchor(k).is_some() && !check_3b(self.inst, &self.rad, &st.cfg, k) {
            return Flow::Continue;
        }
        self.with_pairs(st, k)
    }

    // ---- cell pairs ----------------------------------------------------

    /// Candidate cells for edge `j = k - 1`, with the points they should be
    /// near: the images of the first and last vertex assigned to the edge.
    fn pair_candidates(&self, st: &State, k: usize) -> (Vec<GridCell>, Vec<GridCell>, bool) {
        let j = k - 1;
        let prev = st.partial[j - 1].as_ref().unwrap();
        let p = prev.midpoint();
        let q = st.blobs[k - 1].c.clone();
        let band = (0.5 * prev.length()).max(st.blobs[k - 1].h);
        let dir = &q - &p;
        let len2 = dir.norm_sq();
        let (mut tmin, mut tmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut any_assigned = false;
        let d = self.inst.dim();
        let mut cells: Vec<GridCell> = Vec::new();
        let push = |c: GridCell, cells: &mut Vec<GridCell>| {
            if !cells.contains(&c) {
                cells.push(c);
            }
        };
        for i in 0..self.n {
            let curve = &self.inst.curves[i];
            let side = self.g1_side[i];
            let half = 0.5 * side * (d as f64).sqrt();
            // cells meeting the previous locus
            let bb = index_box_of_ball(&p, 0.5 * prev.length() + side, side);
            for_each_cell(&bb, side, |c| {
                let r = c.region();
                if r.clip_param(prev).is_some() && self.g1_member(i, &c) {
                    push(c, &mut cells);
                }
            });
            for a in st.cuts[i][j]..st.cuts[i][k] {
                any_assigned = true;
                let v = curve.vertex(a);
                if len2 > 0.0 {
                    let t = ((v - &p).dot(&dir) / len2).clamp(0.0, 1.0);
                    tmin = tmin.min(t);
                    tmax = tmax.max(t);
                }
                let ball = index_box_of_ball(v, self.g1_rad[i], side);
                // intersect with the band's bounding box
                let ext = band + half + side;
                let mut bb = ball.clone();
                for t in 0..d {
                    let lo = (p[t].min(q[t]) - ext) / side;
                    let hi = (p[t].max(q[t]) + ext) / side;
                    bb.lo[t] = bb.lo[t].max(lo.floor() as i64);
                    bb.hi[t] = bb.hi[t].min(hi.floor() as i64);
                }
                if (0..d).any(|t| bb.lo[t] > bb.hi[t]) {
                    continue;
                }
                let rr = self.g1_rad[i] + 1e-12 * (1.0 + self.g1_rad[i]);
                for_each_cell(&bb, side, |c| {
                    if c.dist_to_point(v) <= rr && seg_point_dist(&p, &q, &c.center()) <= half + band + 1e-12 {
                        push(c, &mut cells);
                    }
                });
            }
        }
        let (x_hat, y_hat) = if any_assigned && len2 > 0.0 {
            (p.add_scaled(&dir, tmin), p.add_scaled(&dir, tmax))
        } else {
            (p.clone(), p.clone())
        };
        let mut l1 = cells.clone();
        l1.sort_by(|a, b| a.center().dist(&x_hat).partial_cmp(&b.center().dist(&x_hat)).unwrap());
        let mut l2 = cells;
        l2.sort_by(|a, b| a.center().dist(&y_hat).partial_cmp(&b.center().dist(&y_hat)).unwrap());
        (l1, l2, any_assigned)
    }

    /// Drops cells that cannot be part of any pair: a second cell must let the
    /// previous locus reach the current one, and each cell must work together
    /// with the bounding box of the other list.
    fn filter_pairs(&self, l1: Vec<GridCell>, l2: Vec<GridCell>, prev: &Segment, cur: &Segment) -> (Vec<GridCell>, Vec<GridCell>) {
        let prev_region = ConvexRegion::from_segment(prev);
        let meets = |r: &GridCell, s: &ConvexRegion, seg: &Segment| {
            f_region(&r.region(), s).ok().and_then(|f| f.clip_param(seg)).is_some()
        };
        let bbox = |cells: &[GridCell]| -> ConvexRegion {
            let d = cells[0].dim();
            let mut lo = vec![f64::INFINITY; d];
            let mut hi = vec![f64::NEG_INFINITY; d];
            for c in cells {
                for (t, (a, b)) in c.lo().into_iter().zip(c.hi()).enumerate() {
                    lo[t] = lo[t].min(a);
                    hi[t] = hi[t].max(b);
                }
            }
            ConvexRegion::from_box(&lo, &hi)
        };
        if l1.is_empty() || l2.is_empty() {
            return (l1, l2);
        }
        let b1 = bbox(&l1);
        let l2: Vec<GridCell> = l2
            .into_iter()
            .filter(|c| meets(c, &prev_region, cur) && meets_box(&b1, c, prev))
            .collect();
        if l2.is_empty() {
            return (Vec::new(), l2);
        }
        let b2 = bbox(&l2);
        let l1: Vec<GridCell> = l1
            .into_iter()
            .filter(|c| f_region(&c.region(), &b2).ok().and_then(|f| f.clip_param(prev)).is_some())
            .collect();
        (l1, l2)
    }

    fn with_pairs(&mut self, st: &mut State, k: usize) -> Flow {
        let j = k - 1;
        let prev_partial = st.partial[j - 1].clone().unwrap();
        let prev_blob = st.blobs[j - 1].clone();
        let cur_blob = st.blobs[k - 1].clone();
        let cur_piece = st.partial[k - 1].clone();
        let (l1, l2, any_assigned) = self.pair_candidates(st, k);
        let (l1, l2) = match &cur_piece {
            Some(cur) => self.filter_pairs(l1, l2, &prev_partial, cur),
            None => (l1, l2),
        };
        if l1.is_empty() || l2.is_empty() {
            return Flow::Continue;
        }
        // assigned vertex ranges per curve for the constraint-1 pre-check
        let ranges: Vec<Option<(usize, usize)>> = (0..self.n)
            .map(|i| {
                let (a, b) = (st.cuts[i][j], st.cuts[i][k]);
                (a < b).then(|| (a, b - 1))
            })
            .collect();
        let mut result = Flow::Continue;
        let mut rejected = 0u64;
        let total = if any_assigned { l1.len() + l2.len() } else { l1.len() + 1 };
        'outer: for s in 0..total.saturating_sub(1) {
            let pairs: Vec<(usize, usize)> = if any_assigned {
                let a_lo = s.saturating_sub(l2.len() - 1);
                let a_hi = s.min(l1.len() - 1);
                (a_lo..=a_hi).map(|a| (a, s - a)).collect()
            } else {
                let c = &l1[s];
                let b = l2.iter().position(|x| x == c).unwrap();
                vec![(s, b)]
            };
            for (a, b) in pairs {
                let (c1, c2) = (&l1[a], &l2[b]);
                let h = 0.5 * c1.diameter().max(c2.diameter());
                let mut ok = true;
                for (i, rg) in ranges.iter().enumerate() {
                    let Some((va, vb)) = *rg else { continue };
                    let curve = &self.inst.curves[i];
                    let (ca, cb) = (c1.center(), c2.center());
                    if seg_point_dist(&ca, &cb, curve.vertex(va)) > self.r1[i] + h
                        || seg_point_dist(&ca, &cb, curve.vertex(vb)) > self.r1[i] + h
                    {
                        ok = false;
                        break;
                    }
                }
                if !ok {
                    rejected += 1;
                    if rejected % 256 == 0 && !self.tick() {
                        result = Flow::Stop;
                        break 'outer;
                    }
                    continue;
                }
                if !self.tick() {
                    result = Flow::Stop;
                    break 'outer;
                }
                let pair = (c1.clone(), c2.clone());
                let c1ok = ranges.iter().enumerate().all(|(i, rg)| match rg {
                    Some(range) => check_constraint1_edge(&pair, &self.inst.curves[i], *range, self.r1[i]),
                    None => true,
                });
                if !c1ok {
                    continue;
                }
                st.cfg.cells[j - 1] = pair;
                let Ok(closed) = close_vertex(self.inst, &self.rad, &st.cfg, j, &prev_partial) else { continue };
                let Ok(g) = begin_vertex(self.inst, &self.rad, &st.cfg, k, Some(&closed)) else { continue };
                st.blobs[j - 1] = Blob::of_segment(&closed);
                st.blobs[k - 1] = Blob::of_segment(&g);
                if !self.dp_ok(&st.blobs[..k]) {
                    continue;
                }
                st.closed[j - 1] = Some(closed);
                st.partial[k - 1] = Some(g.clone());
                let f = if k == self.l { self.leaf(st, g) } else { self.level(st, k + 1) };
                match f {
                    Flow::Continue => {}
                    other => {
                        result = other;
                        break 'outer;
                    }
                }
                st.blobs[j - 1] = prev_blob.clone();
                st.blobs[k - 1] = cur_blob.clone();
                st.partial[k - 1] = cur_piece.clone();
            }
        }
        st.blobs[j - 1] = prev_blob;
        st.blobs[k - 1] = cur_blob;
        st.partial[k - 1] = cur_piece;
        st.partial[j - 1] = Some(prev_partial);
        result
    }

    fn leaf(&mut self, st: &mut State, last: Segment) -> Flow {
        let l = self.l;
        let mut segs: Vec<Segment> = (0..l - 1).map(|j| st.closed[j].clone().unwrap()).collect();
        segs.push(last);
        let chain = GammaChain { segments: segs };
        let Ok(curve) = backward_extract(&chain, &st.cfg) else { return Flow::Continue };
        if verify_candidate(&curve, self.verify, self.verify_slack) {
            return Flow::Found(curve, Box::new(st.cfg.clone()), chain);
        }
        Flow::Continue
    }
}

/// Whether `seg` meets `F(r, c)`.
fn meets_box(r: &ConvexRegion, c: &GridCell, seg: &Segment) -> bool {
    f_region(r, &c.region()).ok().and_then(|f| f.clip_param(seg)).is_some()
}

fn for_each_cell(b: &IdxBox, side: f64, mut f: impl FnMut(GridCell)) {
    let d = b.lo.len();
    let mut idx = b.lo.clone();
    if (0..d).any(|t| b.lo[t] > b.hi[t]) {
        return;
    }
    loop {
        f(GridCell::new(CellIndex::from_slice(&idx), side));
        let mut t = d;
        loop {
            if t == 0 {
                return;
            }
            t -= 1;
            if idx[t] < b.hi[t] {
                idx[t] += 1;
                for u in t + 1..d {
                    idx[u] = b.lo[u];
                }
                break;
            }
        }
    }
}

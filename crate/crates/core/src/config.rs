//! Configurations: vertex partitions, cell pairs, carrier segments and anchor
//! cells, with the cheap structural checks.

use serde::{Deserialize, Serialize};

use crate::curve::PolygonalCurve;
use crate::discretize::{GridCell, GridSet, SegmentFamily};
use crate::error::{Error, Result};
use crate::frechet::free_space_decision;
use crate::geom::{clip_param_ball, Point, Segment};

/// Non-decreasing map from the vertices of one curve to `[0, l-1]`, with the
/// first vertex mapped to 0. Vertices are zero-based here.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartitionFn {
    pub values: Vec<usize>,
}

impl PartitionFn {
    pub fn new(values: Vec<usize>) -> Result<Self> {
        if values.first() != Some(&0) {
            return Err(Error::InvalidParameter("partition must map the first vertex to 0".into()));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter("partition must be non-decreasing".into()));
        }
        Ok(PartitionFn { values })
    }

    /// Inclusive vertex range mapped to `j`, if any.
    pub fn preimage(&self, j: usize) -> Option<(usize, usize)> {
        let a = self.values.iter().position(|&v| v == j)?;
        let b = self.values.iter().rposition(|&v| v == j)?;
        Some((a, b))
    }

    /// First vertex with value `>= j` (the vertex count if none).
    pub fn cut(&self, j: usize) -> usize {
        self.values.iter().position(|&v| v >= j).unwrap_or(self.values.len())
    }

    /// The edge `a` with `pi(a) < k <= pi(a + 1)`, if there is one.
    pub fn edge_serving(&self, k: usize) -> Option<usize> {
        let c = self.cut(k);
        (c >= 1 && c < self.values.len()).then(|| c - 1)
    }
}

/// All partitions of `m` vertices into at most `l` contiguous groups.
pub fn enumerate_partitions(m: usize, l: usize) -> Vec<PartitionFn> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; m];
    fn rec(pos: usize, m: usize, l: usize, cur: &mut Vec<usize>, out: &mut Vec<PartitionFn>) {
        if pos == m {
            out.push(PartitionFn { values: cur.clone() });
            return;
        }
        let lo = cur[pos - 1];
        for v in lo..l {
            cur[pos] = v;
            rec(pos + 1, m, l, cur, out);
        }
    }
    if m == 0 || l == 0 {
        return out;
    }
    rec(1, m, l, &mut cur, &mut out);
    out
}

/// `(P, C, S, A)` for a candidate curve with `l` vertices. Paper indices are
/// one-based; here `cells[j - 1]` is the pair for edge `j`, and `segments[k - 1]`
/// and `anchors[k - 1]` belong to vertex `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub l: usize,
    pub partitions: Vec<PartitionFn>,
    pub cells: Vec<(GridCell, GridCell)>,
    pub segments: Vec<Segment>,
    pub segment_ids: Vec<usize>,
    pub anchors: Vec<Option<GridCell>>,
}

impl Configuration {
    pub fn cell_pair(&self, j: usize) -> &(GridCell, GridCell) {
        &self.cells[j - 1]
    }

    pub fn segment(&self, k: usize) -> &Segment {
        &self.segments[k - 1]
    }

    pub fn anchor(&self, k: usize) -> Option<&GridCell> {
        self.anchors[k - 1].as_ref()
    }

    /// Structural validity: sizes, partition invariants and non-null end anchors.
    pub fn validate(&self, m: usize) -> Result<()> {
        let l = self.l;
        if l == 0 {
            return Err(Error::InvalidParameter("l must be positive".into()));
        }
        if self.cells.len() != l - 1 || self.segments.len() != l || self.anchors.len() != l {
            return Err(Error::InvalidParameter("configuration component sizes do not match l".into()));
        }
        if self.anchors[0].is_none() || self.anchors[l - 1].is_none() {
            return Err(Error::InvalidParameter("first and last anchors must be cells".into()));
        }
        for p in &self.partitions {
            if p.values.len() != m || p.values.iter().any(|&v| v >= l) {
                return Err(Error::InvalidParameter("partition does not fit the curves".into()));
            }
            PartitionFn::new(p.values.clone())?;
        }
        Ok(())
    }
}

/// Radius used by constraint 1 for a curve with threshold `delta`.
pub fn constraint1_radius(delta: f64, eps: f64, dim: usize) -> f64 {
    delta + 2.0 * (dim as f64).sqrt() * eps * delta
}

/// Constraint 1 for a single edge `j` (paper index) and curve.
pub fn check_constraint1_edge(pair: &(GridCell, GridCell), curve: &PolygonalCurve, range: (usize, usize), radius: f64) -> bool {
    let (a, b) = range;
    let sub = curve.subcurve(a, b);
    let (va, vb) = (curve.vertex(a), curve.vertex(b));
    for x in pair.0.vertices() {
        for y in pair.1.vertices() {
            let s = Segment::new(x.clone(), y);
            let Some((p1, _)) = clip_param_ball(&s, va, radius, 0.0) else {
                return false;
            };
            let Some((_, q2)) = clip_param_ball(&s, vb, radius, 0.0) else {
                return false;
            };
            let pq = PolygonalCurve::new(vec![s.at(p1), s.at(q2)]).expect("two finite points");
            if !free_space_decision(&pq, &sub, radius) {
                return false;
            }
        }
    }
    true
}

/// Constraint 1 over all curves and edges.
pub fn check_constraint1(cfg: &Configuration, curves: &[PolygonalCurve], thresholds: &[f64], eps: f64) -> bool {
    for (i, (curve, &delta)) in curves.iter().zip(thresholds).enumerate() {
        let r = constraint1_radius(delta, eps, curve.dim());
        for j in 1..cfg.l {
            if let Some(range) = cfg.partitions[i].preimage(j) {
                if !check_constraint1_edge(cfg.cell_pair(j), curve, range, r) {
                    return false;
                }
            }
        }
    }
    true
}

/// Whether every vertex of `cell` lies within `delta_i + 2 sqrt(d) eps delta_max`
/// of `pick(curve_i)` for every curve.
pub fn anchor_within(cell: &GridCell, curves: &[PolygonalCurve], thresholds: &[f64], eps: f64, pick: impl Fn(&PolygonalCurve) -> &Point) -> bool {
    let dmax = thresholds.iter().cloned().fold(0.0, f64::max);
    curves.iter().zip(thresholds).all(|(c, &delta)| {
        let r = delta + 2.0 * (c.dim() as f64).sqrt() * eps * dmax;
        cell.max_dist_to_point(pick(c)) <= r + 1e-12
    })
}

/// Constraint 3(a) for the first and last anchors.
pub fn check_constraint3a(first: &GridCell, last: &GridCell, curves: &[PolygonalCurve], thresholds: &[f64], eps: f64) -> bool {
    anchor_within(first, curves, thresholds, eps, |c| c.first()) && anchor_within(last, curves, thresholds, eps, |c| c.last())
}

/// The full configuration space in a fixed order: partitions vary slowest,
/// then cell pairs, then segments, then anchors. End anchors are restricted to
/// cells passing constraint 3(a).
pub struct ConfigurationStream {
    l: usize,
    partitions: Vec<PartitionFn>,
    n: usize,
    g1: Vec<GridCell>,
    segs: Vec<Segment>,
    first_anchors: Vec<GridCell>,
    last_anchors: Vec<GridCell>,
    mid_anchors: Vec<Option<GridCell>>,
    radices: Vec<u64>,
    next: u64,
    total: Option<u64>,
    cap: u64,
}

impl ConfigurationStream {
    /// `g1` is the per-curve first grid family, `g2` the second grid. End
    /// anchors must additionally pass 3(a); middle anchors may be null.
    #[allow(clippy::too_many_arguments)]
    pub fn new(curves: &[PolygonalCurve], thresholds: &[f64], l: usize, eps: f64, g1: &[GridSet], g2: &GridSet, segs: &SegmentFamily, cap: u64) -> Self {
        let m = curves[0].len();
        let partitions = enumerate_partitions(m, l);
        let mut cells: Vec<GridCell> = Vec::new();
        for set in g1 {
            for c in &set.cells {
                if !cells.contains(c) {
                    cells.push(c.clone());
                }
            }
        }
        let seg_list: Vec<Segment> = segs.iter().cloned().collect();
        let on_some_segment = |c: &GridCell| {
            let r = c.region();
            seg_list.iter().any(|s| r.clip_param(s).is_some())
        };
        let eligible: Vec<GridCell> = g2.cells.iter().filter(|c| on_some_segment(c)).cloned().collect();
        let first_anchors: Vec<GridCell> = eligible
            .iter()
            .filter(|c| anchor_within(c, curves, thresholds, eps, |t| t.first()))
            .cloned()
            .collect();
        let last_anchors: Vec<GridCell> = eligible
            .iter()
            .filter(|c| anchor_within(c, curves, thresholds, eps, |t| t.last()))
            .cloned()
            .collect();
        let mut mid_anchors: Vec<Option<GridCell>> = eligible.into_iter().map(Some).collect();
        mid_anchors.push(None);
        let n = curves.len();
        let mut radices = vec![partitions.len() as u64; n];
        for _ in 0..2 * (l - 1) {
            radices.push(cells.len() as u64);
        }
        for _ in 0..l {
            radices.push(seg_list.len() as u64);
        }
        for k in 1..=l {
            let r = if k == 1 {
                first_anchors.len()
            } else if k == l {
                if l == 1 {
                    first_anchors.len()
                } else {
                    last_anchors.len()
                }
            } else {
                mid_anchors.len()
            };
            radices.push(r as u64);
        }
        let total = radices.iter().try_fold(1u64, |acc, &r| acc.checked_mul(r));
        ConfigurationStream {
            l,
            partitions,
            n,
            g1: cells,
            segs: seg_list,
            first_anchors,
            last_anchors,
            mid_anchors,
            radices,
            next: 0,
            total,
            cap,
        }
    }

    /// Number of configurations in the stream, or `None` on overflow.
    pub fn total(&self) -> Option<u64> {
        self.total
    }

    pub fn radices(&self) -> &[u64] {
        &self.radices
    }

    fn digits(&self, mut rank: u64) -> Vec<u64> {
        let mut d = vec![0u64; self.radices.len()];
        for (k, &r) in self.radices.iter().enumerate().rev() {
            d[k] = rank % r;
            rank /= r;
        }
        d
    }

    /// The configuration at position `rank`.
    pub fn nth_config(&self, rank: u64) -> Option<Configuration> {
        if rank >= self.total? {
            return None;
        }
        let d = self.digits(rank);
        let l = self.l;
        let mut it = d.into_iter();
        let partitions = (0..self.n).map(|_| self.partitions[it.next().unwrap() as usize].clone()).collect();
        let cells = (0..l - 1)
            .map(|_| {
                let a = self.g1[it.next().unwrap() as usize].clone();
                let b = self.g1[it.next().unwrap() as usize].clone();
                (a, b)
            })
            .collect();
        let segment_ids: Vec<usize> = (0..l).map(|_| it.next().unwrap() as usize).collect();
        let segments = segment_ids.iter().map(|&s| self.segs[s].clone()).collect();
        let anchors = (1..=l)
            .map(|k| {
                let x = it.next().unwrap() as usize;
                if k == 1 {
                    Some(self.first_anchors[x].clone())
                } else if k == l {
                    Some(self.last_anchors[x].clone())
                } else {
                    self.mid_anchors[x].clone()
                }
            })
            .collect();
        Some(Configuration {
            l,
            partitions,
            cells,
            segments,
            segment_ids,
            anchors,
        })
    }

    /// Position of `cfg` in the stream, if it belongs to it.
    pub fn position_of(&self, cfg: &Configuration) -> Option<u64> {
        let l = self.l;
        if cfg.l != l {
            return None;
        }
        let mut digits = Vec::with_capacity(self.radices.len());
        for p in &cfg.partitions {
            digits.push(self.partitions.iter().position(|q| q == p)? as u64);
        }
        for (a, b) in &cfg.cells {
            digits.push(self.g1.iter().position(|c| c == a)? as u64);
            digits.push(self.g1.iter().position(|c| c == b)? as u64);
        }
        for &s in &cfg.segment_ids {
            (s < self.segs.len()).then_some(())?;
            digits.push(s as u64);
        }
        for k in 1..=l {
            let a = cfg.anchors[k - 1].as_ref();
            let x = if k == 1 {
                self.first_anchors.iter().position(|c| Some(c) == a)?
            } else if k == l {
                self.last_anchors.iter().position(|c| Some(c) == a)?
            } else {
                self.mid_anchors.iter().position(|c| c.as_ref() == a)?
            };
            digits.push(x as u64);
        }
        let mut rank = 0u64;
        for (dg, &r) in digits.iter().zip(&self.radices) {
            rank = rank.checked_mul(r)?.checked_add(*dg)?;
        }
        Some(rank)
    }
}

impl Iterator for ConfigurationStream {
    type Item = Result<Configuration>;

    fn next(&mut self) -> Option<Self::Item> {
        let total = self.total.unwrap_or(u64::MAX);
        if self.next >= total {
            return None;
        }
        if self.next >= self.cap {
            self.next = total;
            return Some(Err(Error::BudgetExceeded(format!(
                "configuration cap {} reached before exhausting {} configurations",
                self.cap,
                self.total.map(|t| t.to_string()).unwrap_or_else(|| "overflowing".into())
            ))));
        }
        let cfg = self.nth_config(self.next);
        self.next += 1;
        cfg.map(Ok)
    }
}

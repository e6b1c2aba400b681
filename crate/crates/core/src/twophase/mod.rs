//! Forward construction of the vertex loci for one configuration, backward
//! extraction of a curve from them, and the solver built on top.

mod search;
mod solve;

pub use search::{SearchLimits, SearchOutcome};
pub use solve::{solve_q, solve_q_exact, SolveMode, SolveOptions, SolveOutcome, SolveReport};

use serde::{Deserialize, Serialize};

use crate::config::{anchor_within, check_constraint1, Configuration};
use crate::curve::PolygonalCurve;
use crate::discretize::GridCell;
use crate::error::{Error, Result};
use crate::frechet::free_space_decision;
use crate::geom::{
    clip_param_ball, clip_param_box_neighborhood, clip_param_cylinder, f_region, ConvexRegion, Cylinder, Point, Segment,
    TOL,
};

/// One instance of the representative-curve problem.
///
/// `curves` are padded to a common vertex count of at least two; the original
/// curves are kept for verification and reporting.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QInstance {
    pub curves: Vec<PolygonalCurve>,
    pub original: Vec<PolygonalCurve>,
    pub thresholds: Vec<f64>,
    pub ell: usize,
    pub eps: f64,
}

impl QInstance {
    pub fn new(curves: Vec<PolygonalCurve>, thresholds: Vec<f64>, ell: usize, eps: f64) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::EmptyInput);
        }
        if curves.len() != thresholds.len() {
            return Err(Error::InvalidParameter(format!(
                "{} curves but {} thresholds",
                curves.len(),
                thresholds.len()
            )));
        }
        if ell == 0 {
            return Err(Error::InvalidParameter("ell must be at least 1".into()));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
        }
        if thresholds.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
            return Err(Error::InvalidParameter("thresholds must be positive and finite".into()));
        }
        let d = curves[0].dim();
        for c in &curves {
            if c.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: c.dim(),
                });
            }
        }
        let m = curves.iter().map(|c| c.len()).max().unwrap().max(2);
        let padded = curves.iter().map(|c| c.pad_to(m)).collect();
        Ok(QInstance {
            curves: padded,
            original: curves,
            thresholds,
            ell,
            eps,
        })
    }

    pub fn n(&self) -> usize {
        self.curves.len()
    }

    pub fn m(&self) -> usize {
        self.curves[0].len()
    }

    pub fn dim(&self) -> usize {
        self.curves[0].dim()
    }

    pub fn delta_max(&self) -> f64 {
        self.thresholds.iter().cloned().fold(0.0, f64::max)
    }

    pub fn delta_min(&self) -> f64 {
        self.thresholds.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Index of the curve with the smallest threshold (first on ties).
    pub fn argmin(&self) -> usize {
        let dmin = self.delta_min();
        self.thresholds.iter().position(|&t| t == dmin).unwrap()
    }

    /// Grid parameter: `eps / (4 sqrt(d))`, so that the final guarantee reads
    /// `delta_i + eps * delta_max`.
    pub fn eps_internal(&self) -> f64 {
        self.eps / (4.0 * (self.dim() as f64).sqrt())
    }

    /// Sub-instance on the curves listed in `ids`.
    pub fn subset(&self, ids: &[usize]) -> Result<QInstance> {
        QInstance::new(
            ids.iter().map(|&i| self.original[i].clone()).collect(),
            ids.iter().map(|&i| self.thresholds[i]).collect(),
            self.ell,
            self.eps,
        )
    }
}

/// Why a configuration was rejected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Abort {
    EmptyGamma(usize),
    Constraint3aFail,
    Constraint3bFail(usize),
    Constraint1Fail,
}

/// The loci `gamma_1..gamma_l` of one successful forward pass.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GammaChain {
    pub segments: Vec<Segment>,
}

/// Grid parameter and radii shared by the forward steps.
#[derive(Clone, Debug)]
pub(crate) struct Radii {
    pub eps: f64,
    pub sd: f64,
    pub dmax: f64,
}

impl Radii {
    pub fn of(inst: &QInstance, eps: f64) -> Self {
        Radii {
            eps,
            sd: (inst.dim() as f64).sqrt(),
            dmax: inst.delta_max(),
        }
    }

    /// Constraint 3(b) ball radius.
    pub fn r3b(&self, delta: f64) -> f64 {
        delta + 2.0 * self.sd * self.eps * self.dmax
    }

    /// Cylinder radius for null anchors.
    pub fn rcyl(&self, delta: f64) -> f64 {
        delta + self.sd * self.eps * self.dmax
    }

    /// Neighbourhood radius around a non-null neighbouring anchor.
    pub fn rnbr(&self, delta: f64) -> f64 {
        delta + 3.0 * self.sd * self.eps * delta
    }
}

fn clip(s: &Segment, region: &ConvexRegion) -> Option<Segment> {
    region.clip_param(s).map(|(t0, t1)| s.sub(t0, t1))
}

fn clip_f(s: &Segment, r: &GridCell, from: &Segment) -> Option<Segment> {
    let f = f_region(&r.region(), &ConvexRegion::from_segment(from)).ok()?;
    clip(s, &f)
}

/// `s` restricted to `<x, e> >= bound` (or `<=` when `upper`).
fn clip_linear(s: &Segment, e: &Point, bound: f64, upper: bool) -> Option<Segment> {
    let fa = e.dot(&s.a) - bound;
    let fb = e.dot(&s.b) - bound;
    let (fa, fb) = if upper { (-fa, -fb) } else { (fa, fb) };
    // keep the part with f >= -tol
    let tol = TOL * (1.0 + bound.abs());
    match (fa >= -tol, fb >= -tol) {
        (true, true) => Some(s.clone()),
        (false, false) => None,
        (true, false) => {
            let t = ((fa + tol) / (fa - fb)).clamp(0.0, 1.0);
            Some(s.sub(0.0, t))
        }
        (false, true) => {
            let t = ((-tol - fa) / (fb - fa)).clamp(0.0, 1.0);
            Some(s.sub(t, 1.0))
        }
    }
}

fn cell_support(c: &GridCell, e: &Point, max: bool) -> f64 {
    let lo = c.lo();
    let mut v = 0.0;
    for k in 0..e.dim() {
        let a = lo[k] * e[k];
        let b = (lo[k] + c.side) * e[k];
        v += if max { a.max(b) } else { a.min(b) };
    }
    v
}

/// Unit direction of edge `a` of `curve`, or `None` for a zero-length edge.
fn edge_dir(curve: &PolygonalCurve, a: usize) -> Option<Point> {
    let d = curve.vertex(a + 1) - curve.vertex(a);
    let n = d.norm();
    (n > 1e-15).then(|| &d * (1.0 / n))
}

/// Constraint 3(b) over anchors `1..=k` (paper indices).
pub(crate) fn check_3b(inst: &QInstance, rad: &Radii, cfg: &Configuration, k: usize) -> bool {
    for (i, curve) in inst.curves.iter().enumerate() {
        let r = rad.r3b(inst.thresholds[i]);
        let pi = &cfg.partitions[i].values;
        for a in 0..curve.num_edges() {
            let (lo_j, hi_j) = (pi[a] + 1, pi[a + 1].min(k));
            if lo_j > hi_j {
                continue;
            }
            let edge = curve.edge(a);
            let mut intervals: Vec<(f64, f64)> = Vec::new();
            for j in lo_j..=hi_j {
                let Some(cell) = cfg.anchor(j) else { continue };
                let mut iv = (0.0f64, 1.0f64);
                for x in cell.vertices() {
                    match clip_param_ball(&edge, &x, r, TOL) {
                        Some((t0, t1)) => {
                            iv.0 = iv.0.max(t0);
                            iv.1 = iv.1.min(t1);
                        }
                        None => return false,
                    }
                }
                if iv.0 > iv.1 {
                    return false;
                }
                intervals.push(iv);
            }
            // trim right to left
            for r_ in (0..intervals.len().saturating_sub(1)).rev() {
                let cap = intervals[r_ + 1].1;
                intervals[r_].1 = intervals[r_].1.min(cap);
                if intervals[r_].0 > intervals[r_].1 {
                    return false;
                }
            }
        }
    }
    true
}

/// First half of the step for vertex `k`: everything that does not depend on
/// the cell pair of edge `k`. `prev` is the closed locus of vertex `k - 1`.
pub(crate) fn begin_vertex(inst: &QInstance, rad: &Radii, cfg: &Configuration, k: usize, prev: Option<&Segment>) -> std::result::Result<Segment, Abort> {
    let l = cfg.l;
    let s = cfg.segment(k).clone();
    let empty = Abort::EmptyGamma(k);
    if k == 1 {
        let a1 = cfg.anchor(1).ok_or(Abort::Constraint3aFail)?;
        if !anchor_within(a1, &inst.curves, &inst.thresholds, rad.eps, |c| c.first()) {
            return Err(Abort::Constraint3aFail);
        }
        if l == 1 && !anchor_within(a1, &inst.curves, &inst.thresholds, rad.eps, |c| c.last()) {
            return Err(Abort::Constraint3aFail);
        }
        return clip(&s, &a1.region()).ok_or(empty);
    }
    let prev = prev.expect("previous locus");
    let c_prev = &cfg.cell_pair(k - 1).1;
    match cfg.anchor(k) {
        Some(cell) => {
            if k == l && !anchor_within(cell, &inst.curves, &inst.thresholds, rad.eps, |c| c.last()) {
                return Err(Abort::Constraint3aFail);
            }
            let g = clip(&s, &cell.region()).ok_or(empty.clone())?;
            let g = clip_f(&g, c_prev, prev).ok_or(empty)?;
            if !check_3b(inst, rad, cfg, k) {
                return Err(Abort::Constraint3bFail(k));
            }
            Ok(g)
        }
        None => {
            let mut g = clip_f(&s, c_prev, prev).ok_or(empty.clone())?;
            for (i, curve) in inst.curves.iter().enumerate() {
                let p = &cfg.partitions[i];
                let Some(a) = p.edge_serving(k) else { continue };
                let delta = inst.thresholds[i];
                let cyl = Cylinder {
                    axis: curve.edge(a),
                    radius: rad.rcyl(delta),
                };
                let (t0, t1) = clip_param_cylinder(&g, &cyl, TOL).ok_or(empty.clone())?;
                g = g.sub(t0, t1);
                // pi(a) < k - 1
                if p.values[a] + 1 >= k {
                    continue;
                }
                let Some(e) = edge_dir(curve, a) else { continue };
                match cfg.anchor(k - 1) {
                    None => {
                        let bound = cell_support(c_prev, &e, false);
                        g = clip_linear(&g, &e, bound, false).ok_or(empty.clone())?;
                    }
                    Some(prev_cell) => {
                        let edge = curve.edge(a);
                        if let Some((_, t1)) = clip_param_box_neighborhood(&edge, &prev_cell.lo(), &prev_cell.hi(), rad.rnbr(delta), TOL) {
                            let bound = e.dot(&edge.at(t1));
                            g = clip_linear(&g, &e, bound, false).ok_or(empty.clone())?;
                        }
                    }
                }
            }
            Ok(g)
        }
    }
}

/// Second half of the step for vertex `k < l`: the cell pair of edge `k` and,
/// for a null anchor, the clips that look at vertex `k + 1`.
pub(crate) fn close_vertex(inst: &QInstance, rad: &Radii, cfg: &Configuration, k: usize, partial: &Segment) -> std::result::Result<Segment, Abort> {
    let empty = Abort::EmptyGamma(k);
    let (c1, c2) = cfg.cell_pair(k);
    let f = f_region(&c1.region(), &c2.region()).map_err(|_| empty.clone())?;
    let mut g = clip(partial, &f).ok_or(empty.clone())?;
    if k == 1 || cfg.anchor(k).is_some() {
        return Ok(g);
    }
    for (i, curve) in inst.curves.iter().enumerate() {
        let p = &cfg.partitions[i];
        let Some(a) = p.edge_serving(k) else { continue };
        // pi(a + 1) >= k + 1
        if p.values[a + 1] < k + 1 {
            continue;
        }
        let Some(e) = edge_dir(curve, a) else { continue };
        match cfg.anchor(k + 1) {
            None => {
                let bound = cell_support(c2, &e, true);
                g = clip_linear(&g, &e, bound, true).ok_or(empty.clone())?;
            }
            Some(next_cell) => {
                let edge = curve.edge(a);
                let r = rad.rnbr(inst.thresholds[i]);
                if let Some((t0, _)) = clip_param_box_neighborhood(&edge, &next_cell.lo(), &next_cell.hi(), r, TOL) {
                    let bound = e.dot(&edge.at(t0));
                    g = clip_linear(&g, &e, bound, true).ok_or(empty.clone())?;
                }
            }
        }
    }
    Ok(g)
}

/// The forward phase on a complete configuration, using grid parameter `eps`.
pub fn forward_construct_eps(cfg: &Configuration, inst: &QInstance, eps: f64) -> std::result::Result<GammaChain, Abort> {
    let rad = Radii::of(inst, eps);
    if !check_constraint1(cfg, &inst.curves, &inst.thresholds, eps) {
        return Err(Abort::Constraint1Fail);
    }
    let l = cfg.l;
    let mut out: Vec<Segment> = Vec::with_capacity(l);
    for k in 1..=l {
        let partial = begin_vertex(inst, &rad, cfg, k, out.last())?;
        let g = if k < l { close_vertex(inst, &rad, cfg, k, &partial)? } else { partial };
        out.push(g);
    }
    Ok(GammaChain { segments: out })
}

/// The forward phase with the instance's own grid parameter.
pub fn forward_construct(cfg: &Configuration, inst: &QInstance) -> std::result::Result<GammaChain, Abort> {
    forward_construct_eps(cfg, inst, inst.eps_internal())
}

/// Walks back from the last locus, each time taking the midpoint of the part of
/// `gamma_j` that can still reach the next chosen point through `c_{j,2}`.
pub fn backward_extract(chain: &GammaChain, cfg: &Configuration) -> Result<PolygonalCurve> {
    let l = chain.segments.len();
    let mut pts = vec![chain.segments[l - 1].midpoint()];
    for j in (1..l).rev() {
        let next = pts.last().unwrap().clone();
        let f = f_region(&cfg.cell_pair(j).1.region(), &ConvexRegion::from_points(vec![next])?)?;
        let g = clip(&chain.segments[j - 1], &f).ok_or(Error::EmptyStep(j))?;
        pts.push(g.midpoint());
    }
    pts.reverse();
    PolygonalCurve::new(pts)
}

/// Whether `sigma` is within `delta_i + slack * delta_max` of every curve.
pub fn verify_candidate(sigma: &PolygonalCurve, inst: &QInstance, slack: f64) -> bool {
    let dmax = inst.delta_max();
    inst.original
        .iter()
        .zip(&inst.thresholds)
        .all(|(c, &d)| free_space_decision(sigma, c, d + slack * dmax))
}

//! Brute-force reference solvers and planted-instance generators for tests.
//!
//! The brute-force searches only rely on the Fréchet module; they do not touch
//! the grids, configurations or the two-phase machinery they are meant to check.
//! Both searches are resolution limited: a curve they find is a genuine
//! solution, but a negative answer only covers curves with grid vertices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Configuration, PartitionFn};
use crate::curve::PolygonalCurve;
use crate::discretize::{build_l, GridCell};
use crate::error::{Error, Result};
use crate::frechet::{free_space_decision, frechet_distance};
use crate::geom::Point;
use crate::twophase::QInstance;

const MAX_GRID_POINTS: usize = 1_000_000;

fn grid_points(lo: &[f64], hi: &[f64], res: f64, keep: impl Fn(&Point) -> bool) -> Result<Vec<Point>> {
    if !(res > 0.0) {
        return Err(Error::InvalidParameter("grid resolution must be positive".into()));
    }
    let d = lo.len();
    let start: Vec<i64> = lo.iter().map(|x| (x / res).floor() as i64).collect();
    let stop: Vec<i64> = hi.iter().map(|x| (x / res).ceil() as i64).collect();
    let mut total = 1f64;
    for k in 0..d {
        total *= (stop[k] - start[k] + 1) as f64;
    }
    if total > MAX_GRID_POINTS as f64 {
        return Err(Error::TooLarge(format!("{total:.0} grid points at resolution {res}")));
    }
    let mut idx = start.clone();
    let mut out = Vec::new();
    loop {
        let p = Point::new(&idx.iter().map(|&i| i as f64 * res).collect::<Vec<_>>());
        if keep(&p) {
            out.push(p);
        }
        let mut k = d;
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            if idx[k] < stop[k] {
                idx[k] += 1;
                for kk in k + 1..d {
                    idx[kk] = start[kk];
                }
                break;
            }
        }
    }
}

fn seg_point_dist(a: &Point, b: &Point, x: &Point) -> f64 {
    let mut dd = 0.0;
    let mut dx = 0.0;
    for k in 0..a.dim() {
        let e = b[k] - a[k];
        dd += e * e;
        dx += (x[k] - a[k]) * e;
    }
    let t = if dd > 0.0 { (dx / dd).clamp(0.0, 1.0) } else { 0.0 };
    x.dist(&a.lerp(b, t))
}

fn curve_point_dist(c: &PolygonalCurve, x: &Point) -> f64 {
    if c.len() == 1 {
        return c.first().dist(x);
    }
    (0..c.len() - 1)
        .map(|a| seg_point_dist(c.vertex(a), c.vertex(a + 1), x))
        .fold(f64::INFINITY, f64::min)
}

/// Exhaustive search for a curve of at most `inst.ell <= 2` grid vertices
/// within `delta_i` of every input curve. The grid covers the bounding box of
/// the tightest curve grown by `2 delta_min`.
pub fn brute_force_q(inst: &QInstance, grid_resolution: f64) -> Result<Option<PolygonalCurve>> {
    if inst.ell > 2 {
        return Err(Error::TooLarge(format!("brute force supports ell <= 2, got {}", inst.ell)));
    }
    let curves = &inst.original;
    let deltas = &inst.thresholds;
    let tight = &curves[inst.argmin()];
    let grow = 2.0 * inst.delta_min();
    let (mut lo, mut hi) = tight.bbox();
    lo.iter_mut().for_each(|x| *x -= grow);
    hi.iter_mut().for_each(|x| *x += grow);
    let near_all = |p: &Point| curves.iter().zip(deltas).all(|(c, &dl)| curve_point_dist(c, p) <= dl);
    let pts = grid_points(&lo, &hi, grid_resolution, near_all)?;
    let feasible = |sigma: &PolygonalCurve| curves.iter().zip(deltas).all(|(c, &dl)| free_space_decision(sigma, c, dl));
    for p in &pts {
        let s = PolygonalCurve::new(vec![p.clone()])?;
        if feasible(&s) {
            return Ok(Some(s));
        }
    }
    if inst.ell < 2 {
        return Ok(None);
    }
    let starts: Vec<&Point> = pts
        .iter()
        .filter(|p| curves.iter().zip(deltas).all(|(c, &dl)| c.first().dist(p) <= dl))
        .collect();
    let ends: Vec<&Point> = pts
        .iter()
        .filter(|p| curves.iter().zip(deltas).all(|(c, &dl)| c.last().dist(p) <= dl))
        .collect();
    for p in &starts {
        for q in &ends {
            // every vertex of every curve must lie near the segment
            let close = curves
                .iter()
                .zip(deltas)
                .all(|(c, &dl)| c.vertices().iter().all(|v| seg_point_dist(p, q, v) <= dl));
            if !close {
                continue;
            }
            let s = PolygonalCurve::new(vec![(*p).clone(), (*q).clone()])?;
            if feasible(&s) {
                return Ok(Some(s));
            }
        }
    }
    Ok(None)
}

/// Bracket on the minimum vertex count of a curve within `delta` of `tau`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaBound {
    /// Fewest grid-vertex curves at distance `delta + slack`; never exceeds
    /// the true value at `delta`.
    pub lower: usize,
    /// Fewest grid-vertex curves at distance `delta`; never below the true value.
    pub upper: usize,
    pub slack: f64,
}

/// Parameters `t` in [0, 1] with `|a + t (b - a) - x| <= r`.
fn within(a: &Point, b: &Point, x: &Point, r: f64) -> Option<(f64, f64)> {
    let (mut qa, mut qb, mut qc) = (0.0, 0.0, 0.0);
    for k in 0..a.dim() {
        let e = b[k] - a[k];
        let w = a[k] - x[k];
        qa += e * e;
        qb += 2.0 * w * e;
        qc += w * w;
    }
    qc -= r * r;
    if qa <= 1e-300 {
        return if qc <= 0.0 { Some((0.0, 1.0)) } else { None };
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let lo = ((-qb - sq) / (2.0 * qa)).max(0.0);
    let hi = ((-qb + sq) / (2.0 * qa)).min(1.0);
    (lo <= hi).then_some((lo, hi))
}

struct KappaSearch<'a> {
    tau: &'a [Point],
    r: f64,
}

impl KappaSearch<'_> {
    fn at(&self, t: f64) -> Point {
        let last = self.tau.len() - 1;
        let e = (t.floor() as usize).min(last.saturating_sub(1));
        if last == 0 {
            return self.tau[0].clone();
        }
        self.tau[e].lerp(&self.tau[e + 1], t - e as f64)
    }

    /// Whether `q` stays within `r` of `tau` on the parameter range `[s, t]`.
    fn stays(&self, q: &Point, s: f64, t: f64) -> bool {
        let tol = self.r + 1e-12;
        if self.at(s).dist(q) > tol || self.at(t).dist(q) > tol {
            return false;
        }
        let mut v = s.floor() as usize + 1;
        while (v as f64) < t {
            if self.tau[v].dist(q) > tol {
                return false;
            }
            v += 1;
        }
        true
    }

    /// Starts of the reachable pieces of `tau` for the far end `q` of the
    /// edge `p q`, when `p` is matched to `tau(s)`.
    fn step(&self, p: &Point, q: &Point, s: f64) -> Vec<f64> {
        let last = self.tau.len() - 1;
        let mut out = Vec::new();
        let mut u_lo = 0.0;
        let mut t_lo = s;
        let e0 = (s.floor() as usize).min(last - 1);
        for e in e0..last {
            if let Some((a, b)) = within(&self.tau[e], &self.tau[e + 1], q, self.r) {
                let (a, b) = (a + e as f64, b + e as f64);
                if b >= t_lo {
                    out.push(a.max(t_lo));
                }
            }
            match within(p, q, &self.tau[e + 1], self.r) {
                Some((a, b)) if b >= u_lo => u_lo = a.max(u_lo),
                _ => break,
            }
            t_lo = (e + 1) as f64;
        }
        out
    }

    fn insert(&self, states: &mut Vec<f64>, q: &Point, t: f64) {
        if states.iter().any(|&s| s <= t && self.stays(q, s, t)) {
            return;
        }
        states.retain(|&s| !(t <= s && self.stays(q, t, s)));
        states.push(t);
    }

    /// Fewest grid vertices, or `None` when no grid curve works.
    fn run(&self, pts: &[Point], max_len: usize) -> Option<usize> {
        let last = (self.tau.len() - 1) as f64;
        if pts.iter().any(|p| self.stays(p, 0.0, last)) {
            return Some(1);
        }
        let mut layer: Vec<Vec<f64>> = pts
            .iter()
            .map(|p| if p.dist(&self.tau[0]) <= self.r + 1e-12 { vec![0.0] } else { vec![] })
            .collect();
        for len in 2..=max_len {
            let mut next: Vec<Vec<f64>> = vec![Vec::new(); pts.len()];
            let mut any = false;
            for (pi, states) in layer.iter().enumerate() {
                for &s in states {
                    for (qi, q) in pts.iter().enumerate() {
                        for t in self.step(&pts[pi], q, s) {
                            if self.stays(q, t, last) {
                                return Some(len);
                            }
                            self.insert(&mut next[qi], q, t);
                            any = true;
                        }
                    }
                }
            }
            if !any {
                return None;
            }
            layer = next;
        }
        None
    }
}

fn kappa_on_grid(tau: &PolygonalCurve, r: f64, res: f64) -> Result<Option<usize>> {
    let (mut lo, mut hi) = tau.bbox();
    lo.iter_mut().for_each(|x| *x -= r);
    hi.iter_mut().for_each(|x| *x += r);
    let pts = grid_points(&lo, &hi, res, |p| curve_point_dist(tau, p) <= r)?;
    if pts.len() > 20_000 {
        return Err(Error::TooLarge(format!("{} grid points near the curve", pts.len())));
    }
    let search = KappaSearch {
        tau: tau.vertices(),
        r,
    };
    Ok(search.run(&pts, 2 * tau.len() + 2))
}

/// Minimum number of vertices of a curve within Fréchet distance `delta` of
/// `tau`, bracketed by searches over grid-vertex curves.
///
/// Rounding every vertex of an optimal curve to the grid moves it by at most
/// `res sqrt(d) / 2`, so the search at `delta + res sqrt(d) / 2` gives a lower
/// bound, and the search at `delta` gives an upper bound.
pub fn brute_force_kappa(tau: &PolygonalCurve, delta: f64, grid_resolution: f64) -> Result<KappaBound> {
    if tau.len() > 8 {
        return Err(Error::TooLarge(format!("curve has {} vertices, at most 8 supported", tau.len())));
    }
    let tau = &tau.dedup_consecutive();
    let slack = grid_resolution * (tau.dim() as f64).sqrt() / 2.0;
    if tau.len() == 1 {
        return Ok(KappaBound {
            lower: 1,
            upper: 1,
            slack,
        });
    }
    let lower = kappa_on_grid(tau, delta + slack, grid_resolution)?
        .ok_or_else(|| Error::TooLarge("grid too coarse for the relaxed search".into()))?;
    let upper = kappa_on_grid(tau, delta, grid_resolution)?.unwrap_or(tau.len());
    Ok(KappaBound {
        lower,
        upper: upper.min(tau.len()),
        slack,
    })
}

/// Parameters of a planted representative-curve instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlantParams {
    /// Vertices of the planted curve.
    pub l_star: usize,
    pub n: usize,
    pub m: usize,
    pub d: usize,
    /// Thresholds, cycled over the curves.
    pub deltas: Vec<f64>,
    /// Vertex perturbation as a fraction of each threshold, in [0, 1].
    pub noise: f64,
    pub eps: f64,
    pub seed: u64,
}

/// A planted instance together with the curve it was built around and the
/// configuration that certifies it.
#[derive(Clone, Debug)]
pub struct Planted {
    pub inst: QInstance,
    pub sigma: PolygonalCurve,
    /// The planted curve with every vertex snapped to the segment family.
    pub snapped: PolygonalCurve,
    pub config: Configuration,
}

fn ball_sample(rng: &mut ChaCha8Rng, d: usize, r: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return v.into_iter().map(|x| x * r).collect();
        }
    }
}

/// Random curve with `l` vertices in the unit cube, consecutive vertices
/// between 0.3 and 0.6 apart.
fn random_curve(rng: &mut ChaCha8Rng, l: usize, d: usize) -> PolygonalCurve {
    let mut pts = vec![Point::new(&(0..d).map(|_| rng.gen_range(0.2..0.8)).collect::<Vec<_>>())];
    while pts.len() < l {
        let prev = pts.last().unwrap().clone();
        let dir = loop {
            let v = ball_sample(rng, d, 1.0);
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n > 0.2 {
                break v.into_iter().map(|x| x / n).collect::<Vec<_>>();
            }
        };
        let len = rng.gen_range(0.3..0.6);
        let next: Vec<f64> = (0..d).map(|k| prev[k] + dir[k] * len).collect();
        if next.iter().all(|&x| (-0.2..=1.2).contains(&x)) {
            pts.push(Point::new(&next));
        }
    }
    PolygonalCurve::new(pts).unwrap()
}

/// Cumulative arc length at each vertex.
fn vertex_times(c: &PolygonalCurve) -> Vec<f64> {
    let mut t = vec![0.0];
    for a in 0..c.num_edges() {
        t.push(t[a] + c.vertex(a).dist(c.vertex(a + 1)));
    }
    t
}

fn point_at_time(c: &PolygonalCurve, times: &[f64], t: f64) -> Point {
    if c.len() == 1 {
        return c.first().clone();
    }
    let a = times.partition_point(|&x| x < t).clamp(1, c.len() - 1) - 1;
    let len = times[a + 1] - times[a];
    let f = if len > 0.0 { ((t - times[a]) / len).clamp(0.0, 1.0) } else { 0.0 };
    c.vertex(a).lerp(c.vertex(a + 1), f)
}

/// Samples `m` times along a curve with vertex times `times`: every vertex time
/// plus `m - l` uniform ones.
fn sample_times(rng: &mut ChaCha8Rng, times: &[f64], m: usize) -> Vec<f64> {
    let total = *times.last().unwrap();
    let mut t: Vec<f64> = times.to_vec();
    while t.len() < m {
        t.push(rng.gen_range(0.0..=total));
    }
    t.sort_by(|a, b| a.partial_cmp(b).unwrap());
    t
}

/// Builds an instance around a random planted curve and records the
/// configuration the existence argument would pick for it.
pub fn plant_instance(params: &PlantParams) -> Result<Planted> {
    let PlantParams {
        l_star,
        n,
        m,
        d,
        ref deltas,
        noise,
        eps,
        seed,
    } = *params;
    if l_star == 0 || n == 0 || m < l_star.max(2) || d == 0 || deltas.is_empty() {
        return Err(Error::InvalidParameter("plant needs l_star >= 1, n >= 1, m >= max(l_star, 2)".into()));
    }
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::InvalidParameter("noise must lie in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = random_curve(&mut rng, l_star, d);
    let times = vertex_times(&sigma);
    let mut curves = Vec::with_capacity(n);
    let mut sample_t = Vec::with_capacity(n);
    for i in 0..n {
        let dl = deltas[i % deltas.len()];
        let t = sample_times(&mut rng, &times, m);
        let pts = t
            .iter()
            .map(|&s| {
                let base = point_at_time(&sigma, &times, s);
                let off = ball_sample(&mut rng, d, noise * dl);
                Point::new(&(0..d).map(|k| base[k] + off[k]).collect::<Vec<_>>())
            })
            .collect();
        curves.push(PolygonalCurve::new(pts)?);
        sample_t.push(t);
    }
    let thresholds: Vec<f64> = (0..n).map(|i| deltas[i % deltas.len()]).collect();
    let inst = QInstance::new(curves, thresholds, l_star, eps)?;
    let e = inst.eps_internal();
    let (dmin, dmax) = (inst.delta_min(), inst.delta_max());

    // snap the planted vertices onto the segment family
    let fam = build_l(&inst.curves[inst.argmin()], dmin, e)?;
    let mut segments = Vec::with_capacity(l_star);
    let mut segment_ids = Vec::with_capacity(l_star);
    let mut w = Vec::with_capacity(l_star);
    for u in sigma.vertices() {
        let (id, s) = fam
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.dist_to_point(u).partial_cmp(&b.1.dist_to_point(u)).unwrap())
            .ok_or_else(|| Error::InvalidParameter("empty segment family".into()))?;
        w.push(s.at(s.closest_param(u)));
        segments.push(s.clone());
        segment_ids.push(id);
    }
    let snapped = PolygonalCurve::new(w.clone())?;

    // vertex a of curve i goes to edge j when its time lies in (T_j, T_{j+1}]
    let partitions = sample_t
        .iter()
        .map(|ts| {
            PartitionFn::new(
                ts.iter()
                    .map(|&s| if s <= 0.0 { 0 } else { times.partition_point(|&x| x < s) })
                    .map(|j| j.min(l_star - 1))
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let side1 = e * dmin / l_star as f64;
    let cells = (0..l_star.saturating_sub(1))
        .map(|j| (GridCell::containing(&w[j], side1), GridCell::containing(&w[j + 1], side1)))
        .collect();
    let anchors = w.iter().map(|p| Some(GridCell::containing(p, e * dmax))).collect();
    let config = Configuration {
        l: l_star,
        partitions,
        cells,
        segments,
        segment_ids,
        anchors,
    };
    config.validate(inst.m())?;
    Ok(Planted {
        inst,
        sigma,
        snapped,
        config,
    })
}

/// Curves drawn around `k` well separated planted centres.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlantedClusters {
    pub curves: Vec<PolygonalCurve>,
    pub centers: Vec<PolygonalCurve>,
    pub assignment: Vec<usize>,
    /// Sum of distances from each curve to its own centre.
    pub cost: f64,
}

/// `k` clusters of `per_cluster` curves with `m` vertices around random
/// `ell`-vertex centres in the plane. Centre `j` is shifted by
/// `j (1 + separation)` along the first axis; every vertex of a member is
/// perturbed by at most `noise`.
pub fn plant_clusters(
    k: usize,
    per_cluster: usize,
    m: usize,
    ell: usize,
    separation: f64,
    noise: f64,
    seed: u64,
) -> Result<PlantedClusters> {
    if k == 0 || per_cluster == 0 || ell == 0 || m < ell.max(2) {
        return Err(Error::InvalidParameter("need k, per_cluster, ell >= 1 and m >= max(ell, 2)".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 2;
    let mut centers = Vec::with_capacity(k);
    for j in 0..k {
        let c = random_curve(&mut rng, ell, d);
        let shift = j as f64 * (1.0 + separation);
        centers.push(c.map_points(|p| Point::new(&[p[0] + shift, p[1]])));
    }
    let mut curves = Vec::new();
    let mut assignment = Vec::new();
    let mut cost = 0.0;
    for (j, c) in centers.iter().enumerate() {
        let times = vertex_times(c);
        for _ in 0..per_cluster {
            let t = sample_times(&mut rng, &times, m);
            let pts = t
                .iter()
                .map(|&s| {
                    let base = point_at_time(c, &times, s);
                    let off = ball_sample(&mut rng, d, noise);
                    Point::new(&[base[0] + off[0], base[1] + off[1]])
                })
                .collect();
            let tau = PolygonalCurve::new(pts)?;
            cost += frechet_distance(&tau, c, 1e-9).value;
            curves.push(tau);
            assignment.push(j);
        }
    }
    Ok(PlantedClusters {
        curves,
        centers,
        assignment,
        cost,
    })
}

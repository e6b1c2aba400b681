//! Continuous Fréchet distance via the free-space diagram, plus the discrete
//! variant used as a reference.

use serde::{Deserialize, Serialize};

use crate::curve::PolygonalCurve;
use crate::geom::{convex_quadratic_sublevel, Point, Segment, TOL};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrechetResult {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Parameter pairs of a matching realizing `upper`, when one was recorded.
    pub matched: Option<Vec<(f64, f64)>>,
}

type Interval = Option<(f64, f64)>;

/// Parameters `t` on `seg` with `|seg(t) - p| <= r`.
fn free_interval(seg_a: &Point, seg_b: &Point, p: &Point, r: f64) -> Interval {
    let mut qa = 0.0;
    let mut qb = 0.0;
    let mut qc = 0.0;
    for k in 0..p.dim() {
        let d = seg_b[k] - seg_a[k];
        let w = seg_a[k] - p[k];
        qa += d * d;
        qb += 2.0 * w * d;
        qc += w * w;
    }
    convex_quadratic_sublevel(qa, qb, qc - r * r, 0.0, 1.0)
}

fn max_dist_to_point(p: &Point, c: &PolygonalCurve) -> f64 {
    c.vertices().iter().fold(0.0, |m, v| m.max(v.dist(p)))
}

/// Decides `d_F(a, b) <= delta` by reachability propagation in the free space.
/// The predicate is closed; ties count as reachable.
pub fn free_space_decision(a: &PolygonalCurve, b: &PolygonalCurve, delta: f64) -> bool {
    let r = delta + TOL;
    if a.len() == 1 {
        return max_dist_to_point(a.first(), b) <= r;
    }
    if b.len() == 1 {
        return max_dist_to_point(b.first(), a) <= r;
    }
    if a.first().dist(b.first()) > r || a.last().dist(b.last()) > r {
        return false;
    }
    let (p, q) = (a.vertices(), b.vertices());
    let (np, nq) = (p.len(), q.len());
    // horiz[i][j]: reachable part of edge i of `a` while `b` sits at vertex j
    // vert[i][j]: reachable part of edge j of `b` while `a` sits at vertex i
    let mut horiz: Vec<Interval> = vec![None; (np - 1) * nq];
    let mut vert: Vec<Interval> = vec![None; np * (nq - 1)];
    let h = |i: usize, j: usize| i * nq + j;
    let v = |i: usize, j: usize| i * (nq - 1) + j;

    // bottom row and left column
    for i in 0..np - 1 {
        let free = free_interval(&p[i], &p[i + 1], &q[0], r);
        let reach = if i == 0 {
            free.filter(|&(lo, _)| lo <= 0.0)
        } else if horiz[h(i - 1, 0)].is_some_and(|(_, hi)| hi >= 1.0) {
            free.filter(|&(lo, _)| lo <= 0.0)
        } else {
            None
        };
        horiz[h(i, 0)] = reach;
    }
    for j in 0..nq - 1 {
        let free = free_interval(&q[j], &q[j + 1], &p[0], r);
        let reach = if j == 0 || vert[v(0, j - 1)].is_some_and(|(_, hi)| hi >= 1.0) {
            free.filter(|&(lo, _)| lo <= 0.0)
        } else {
            None
        };
        vert[v(0, j)] = reach;
    }
    for i in 0..np - 1 {
        for j in 0..nq - 1 {
            let bottom = horiz[h(i, j)];
            let left = vert[v(i, j)];
            // top boundary: edge i of a, vertex j+1 of b
            let free_top = free_interval(&p[i], &p[i + 1], &q[j + 1], r);
            horiz[h(i, j + 1)] = match (left, bottom, free_top) {
                (_, _, None) => None,
                (Some(_), _, f) => f,
                (None, Some((lo, _)), Some((flo, fhi))) => {
                    let s = lo.max(flo);
                    (s <= fhi).then_some((s, fhi))
                }
                (None, None, _) => None,
            };
            // right boundary: edge j of b, vertex i+1 of a
            let free_right = free_interval(&q[j], &q[j + 1], &p[i + 1], r);
            vert[v(i + 1, j)] = match (bottom, left, free_right) {
                (_, _, None) => None,
                (Some(_), _, f) => f,
                (None, Some((lo, _)), Some((flo, fhi))) => {
                    let s = lo.max(flo);
                    (s <= fhi).then_some((s, fhi))
                }
                (None, None, _) => None,
            };
        }
    }
    let top_right = horiz[h(np - 2, nq - 1)].is_some_and(|(_, hi)| hi >= 1.0)
        || vert[v(np - 1, nq - 2)].is_some_and(|(_, hi)| hi >= 1.0);
    top_right
}

/// Candidate values at which the free space changes combinatorially.
fn critical_values(a: &PolygonalCurve, b: &PolygonalCurve, lo: f64, hi: f64, out: &mut Vec<f64>) {
    let (p, q) = (a.vertices(), b.vertices());
    for x in p {
        for e in q.windows(2) {
            let s = Segment::new(e[0].clone(), e[1].clone());
            let dv = s.dist_to_point(x);
            if dv >= lo && dv <= hi {
                out.push(dv);
            }
        }
        for y in q {
            let dv = x.dist(y);
            if dv >= lo && dv <= hi {
                out.push(dv);
            }
        }
    }
    // equidistance from two vertices of one curve along an edge of the other
    for k in 0..p.len() {
        for l in k + 1..p.len() {
            let n = &p[l] - &p[k];
            let c = 0.5 * (p[l].norm_sq() - p[k].norm_sq());
            for e in q.windows(2) {
                let d = &e[1] - &e[0];
                let den = n.dot(&d);
                if den.abs() < 1e-300 {
                    continue;
                }
                let t = (c - n.dot(&e[0])) / den;
                if !(0.0..=1.0).contains(&t) {
                    continue;
                }
                let z = e[0].add_scaled(&d, t);
                let dv = z.dist(&p[k]);
                if dv >= lo && dv <= hi {
                    out.push(dv);
                }
            }
        }
    }
}

/// Fréchet distance by bisection over the decision procedure.
///
/// The bracket starts at `[max endpoint distance, d(a1, b1) + len(a) + len(b)]`.
/// Once it is narrower than `tol` its upper end is pulled down to the smallest
/// critical value inside it that still decides true, when the curves are small
/// enough to enumerate those values.
pub fn frechet_distance(a: &PolygonalCurve, b: &PolygonalCurve, tol: f64) -> FrechetResult {
    let mut lo = a.first().dist(b.first()).max(a.last().dist(b.last()));
    if free_space_decision(a, b, lo) {
        return FrechetResult {
            value: lo,
            lower: lo,
            upper: lo,
            matched: None,
        };
    }
    let mut hi = a.first().dist(b.first()) + a.length() + b.length();
    let mut iters = 0;
    while hi - lo > tol && iters < 64 {
        let mid = 0.5 * (lo + hi);
        if free_space_decision(a, b, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        iters += 1;
    }
    let (np, nq) = (a.len(), b.len());
    if np * nq * (np + nq) <= 2_000_000 {
        let mut cands = Vec::new();
        critical_values(a, b, lo, hi, &mut cands);
        critical_values(b, a, lo, hi, &mut cands);
        cands.sort_by(|x, y| x.partial_cmp(y).unwrap());
        if let Some(&c) = cands.iter().find(|&&c| free_space_decision(a, b, c)) {
            hi = hi.min(c);
        }
    }
    FrechetResult {
        value: hi,
        lower: lo,
        upper: hi,
        matched: None,
    }
}

/// Discrete Fréchet distance over the vertex sequences.
pub fn discrete_frechet(a: &PolygonalCurve, b: &PolygonalCurve) -> f64 {
    let (p, q) = (a.vertices(), b.vertices());
    let nq = q.len();
    let mut prev = vec![0.0f64; nq];
    let mut cur = vec![0.0f64; nq];
    for (i, x) in p.iter().enumerate() {
        for j in 0..nq {
            let d = x.dist(&q[j]);
            cur[j] = match (i, j) {
                (0, 0) => d,
                (0, _) => cur[j - 1].max(d),
                (_, 0) => prev[0].max(d),
                _ => prev[j].min(prev[j - 1]).min(cur[j - 1]).max(d),
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[nq - 1]
}

/// Subdivides every edge evenly so that no edge is longer than `step`.
pub fn densify(a: &PolygonalCurve, step: f64) -> PolygonalCurve {
    assert!(step > 0.0, "densify step must be positive");
    let v = a.vertices();
    let mut out = vec![v[0].clone()];
    for w in v.windows(2) {
        let len = w[0].dist(&w[1]);
        let pieces = ((len / step).ceil() as usize).max(1);
        for s in 1..pieces {
            out.push(w[0].lerp(&w[1], s as f64 / pieces as f64));
        }
        out.push(w[1].clone());
    }
    if v.len() == 1 {
        return a.clone();
    }
    PolygonalCurve::new(out).expect("densify keeps curve valid")
}

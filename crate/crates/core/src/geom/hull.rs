use std::collections::HashMap;

use super::point::Point;
use super::primitives::Halfspace;
use super::region::ConvexRegion;
use crate::error::{Error, Result};

const HULL_TOL: f64 = 1e-10;

fn cross2(o: &Point, a: &Point, b: &Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn cmp_lex(a: &Point, b: &Point) -> std::cmp::Ordering {
    for k in 0..a.dim() {
        match a[k].partial_cmp(&b[k]).unwrap() {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Counter-clockwise hull of planar points, collinear points dropped.
pub fn hull_2d(points: &[Point]) -> Vec<Point> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(cmp_lex);
    pts.dedup_by(|a, b| a.dist_sq(b) <= HULL_TOL * HULL_TOL);
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<Point> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross2(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= HULL_TOL {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Point> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross2(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= HULL_TOL {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn cross3(a: &Point, b: &Point) -> Point {
    Point::new(&[a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])
}

/// Orthonormal basis of the orthogonal complement of `span`.
fn complement_basis(span: &[Point], d: usize) -> Vec<Point> {
    let mut basis: Vec<Point> = Vec::new();
    for v in span {
        let mut w = v.clone();
        for b in &basis {
            w = w.add_scaled(b, -w.dot(b));
        }
        let n = w.norm();
        if n > HULL_TOL {
            basis.push(&w * (1.0 / n));
        }
    }
    let inner = basis.len();
    for k in 0..d {
        let mut w = Point::zeros(d);
        w[k] = 1.0;
        for b in &basis {
            w = w.add_scaled(b, -w.dot(b));
        }
        let n = w.norm();
        if n > 1e-6 {
            basis.push(&w * (1.0 / n));
        }
    }
    basis.split_off(inner)
}

fn equality_pairs(normals: &[Point], through: &Point, out: &mut Vec<Halfspace>) {
    for n in normals {
        let c = n.dot(through);
        out.push(Halfspace {
            normal: n.clone(),
            offset: c,
        });
        out.push(Halfspace {
            normal: -n,
            offset: -c,
        });
    }
}

/// Hull of a segment's worth of collinear points, in any dimension.
fn hull_collinear(pts: &[Point]) -> ConvexRegion {
    let d = pts[0].dim();
    let base = &pts[0];
    let far = pts
        .iter()
        .max_by(|a, b| a.dist_sq(base).partial_cmp(&b.dist_sq(base)).unwrap())
        .unwrap();
    if far.dist(base) <= HULL_TOL {
        let mut hs = Vec::new();
        let axes: Vec<Point> = (0..d)
            .map(|k| {
                let mut e = Point::zeros(d);
                e[k] = 1.0;
                e
            })
            .collect();
        equality_pairs(&axes, base, &mut hs);
        return ConvexRegion::with_parts(vec![base.clone()], Vec::new(), hs, d);
    }
    let u = &(far - base) * (1.0 / far.dist(base));
    let proj = |p: &Point| (p - base).dot(&u);
    let lo = pts.iter().min_by(|a, b| proj(a).partial_cmp(&proj(b)).unwrap()).unwrap().clone();
    let hi = pts.iter().max_by(|a, b| proj(a).partial_cmp(&proj(b)).unwrap()).unwrap().clone();
    let mut hs = vec![
        Halfspace {
            normal: u.clone(),
            offset: u.dot(&hi),
        },
        Halfspace {
            normal: -&u,
            offset: -u.dot(&lo),
        },
    ];
    equality_pairs(&complement_basis(&[u], d), base, &mut hs);
    ConvexRegion::with_parts(vec![lo, hi], Vec::new(), hs, d)
}

fn region_from_polygon(poly: Vec<Point>, extra: Vec<Halfspace>, dim: usize, lift: impl Fn(&Point) -> Point, normal_lift: impl Fn(&Point) -> Point) -> ConvexRegion {
    let k = poly.len();
    let mut hs = extra;
    for i in 0..k {
        let a = &poly[i];
        let b = &poly[(i + 1) % k];
        // outward normal of a ccw edge
        let n2 = Point::new(&[b[1] - a[1], -(b[0] - a[0])]);
        let n = normal_lift(&n2);
        let len = n.norm();
        let n = &n * (1.0 / len);
        let la = lift(a);
        hs.push(Halfspace {
            offset: n.dot(&la),
            normal: n,
        });
    }
    let verts = poly.iter().map(lift).collect();
    ConvexRegion::with_parts(verts, Vec::new(), hs, dim)
}

fn hull_3d(pts: &[Point]) -> ConvexRegion {
    // thin the input: per (x, y) column only the z-extremes can be hull vertices
    let mut cols: HashMap<(u64, u64), (Point, Point)> = HashMap::new();
    for p in pts {
        let key = (p[0].to_bits(), p[1].to_bits());
        cols.entry(key)
            .and_modify(|(lo, hi)| {
                if p[2] < lo[2] {
                    *lo = p.clone();
                }
                if p[2] > hi[2] {
                    *hi = p.clone();
                }
            })
            .or_insert((p.clone(), p.clone()));
    }
    let mut cand: Vec<Point> = Vec::with_capacity(cols.len() * 2);
    for (_, (lo, hi)) in cols {
        if lo.dist_sq(&hi) > 0.0 {
            cand.push(hi);
        }
        cand.push(lo);
    }
    cand.sort_by(cmp_lex);

    // initial simplex
    let i0 = 0;
    let i1 = (0..cand.len())
        .max_by(|&a, &b| cand[a].dist_sq(&cand[i0]).partial_cmp(&cand[b].dist_sq(&cand[i0])).unwrap())
        .unwrap();
    if cand[i1].dist(&cand[i0]) <= HULL_TOL {
        return hull_collinear(&cand);
    }
    let u = &cand[i1] - &cand[i0];
    let line_dist = |p: &Point| cross3(&(p - &cand[i0]), &u).norm() / u.norm();
    let i2 = (0..cand.len())
        .max_by(|&a, &b| line_dist(&cand[a]).partial_cmp(&line_dist(&cand[b])).unwrap())
        .unwrap();
    if line_dist(&cand[i2]) <= HULL_TOL {
        return hull_collinear(&cand);
    }
    let nrm = cross3(&u, &(&cand[i2] - &cand[i0]));
    let nrm = &nrm * (1.0 / nrm.norm());
    let plane_dist = |p: &Point| (p - &cand[i0]).dot(&nrm);
    let i3 = (0..cand.len())
        .max_by(|&a, &b| plane_dist(&cand[a]).abs().partial_cmp(&plane_dist(&cand[b]).abs()).unwrap())
        .unwrap();
    if plane_dist(&cand[i3]).abs() <= HULL_TOL {
        return hull_coplanar(&cand, &cand[i0].clone(), &nrm);
    }

    struct Face {
        v: [usize; 3],
        n: Point,
        off: f64,
        alive: bool,
    }
    let make = |v: [usize; 3], pts: &[Point]| -> Face {
        let n = cross3(&(&pts[v[1]] - &pts[v[0]]), &(&pts[v[2]] - &pts[v[0]]));
        let n = &n * (1.0 / n.norm());
        let off = n.dot(&pts[v[0]]);
        Face { v, n, off, alive: true }
    };
    let interior = {
        let s = &(&(&cand[i0] + &cand[i1]) + &(&cand[i2] + &cand[i3])) * 0.25;
        s
    };
    let mut faces: Vec<Face> = Vec::new();
    for tri in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        let mut f = make(tri, &cand);
        if f.n.dot(&interior) > f.off {
            f = make([tri[0], tri[2], tri[1]], &cand);
        }
        faces.push(f);
    }
    let base = [i0, i1, i2, i3];
    // farthest-first insertion keeps coplanar slivers rare
    let mut order: Vec<usize> = (0..cand.len()).filter(|i| !base.contains(i)).collect();
    order.sort_by(|&a, &b| {
        cand[b]
            .dist_sq(&interior)
            .partial_cmp(&cand[a].dist_sq(&interior))
            .unwrap()
            .then(a.cmp(&b))
    });
    for pi in order {
        let p = &cand[pi];
        let visible: Vec<usize> = faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.alive && f.n.dot(p) - f.off > HULL_TOL)
            .map(|(i, _)| i)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for &fi in &visible {
            let v = faces[fi].v;
            for e in 0..3 {
                edges.insert((v[e], v[(e + 1) % 3]), fi);
            }
        }
        let mut horizon = Vec::new();
        for &fi in &visible {
            let v = faces[fi].v;
            for e in 0..3 {
                let (a, b) = (v[e], v[(e + 1) % 3]);
                if !edges.contains_key(&(b, a)) {
                    horizon.push((a, b));
                }
            }
        }
        for &fi in &visible {
            faces[fi].alive = false;
        }
        for (a, b) in horizon {
            faces.push(make([a, b, pi], &cand));
        }
    }
    let faces: Vec<Face> = faces.into_iter().filter(|f| f.alive).collect();

    // keep only proper vertices: incident facet normals must span R^3
    let mut incident: HashMap<usize, Vec<Point>> = HashMap::new();
    for f in &faces {
        for &v in &f.v {
            incident.entry(v).or_default().push(f.n.clone());
        }
    }
    let mut verts: Vec<usize> = incident
        .into_iter()
        .filter(|(_, ns)| normal_rank(ns) == 3)
        .map(|(v, _)| v)
        .collect();
    verts.sort();
    let mut hs: Vec<Halfspace> = Vec::new();
    for f in &faces {
        let dup = hs
            .iter()
            .any(|h| h.normal.dist(&f.n) <= 1e-9 && (h.offset - f.off).abs() <= 1e-9);
        if !dup {
            hs.push(Halfspace {
                normal: f.n.clone(),
                offset: f.off,
            });
        }
    }
    ConvexRegion::with_parts(verts.into_iter().map(|i| cand[i].clone()).collect(), Vec::new(), hs, 3)
}

fn normal_rank(ns: &[Point]) -> usize {
    let mut basis: Vec<Point> = Vec::new();
    for n in ns {
        let mut w = n.clone();
        for b in &basis {
            w = w.add_scaled(b, -w.dot(b));
        }
        let len = w.norm();
        if len > 1e-7 {
            basis.push(&w * (1.0 / len));
        }
    }
    basis.len()
}

fn hull_coplanar(pts: &[Point], origin: &Point, normal: &Point) -> ConvexRegion {
    let basis = complement_basis(&[normal.clone()], 3);
    let (e1, e2) = (basis[0].clone(), basis[1].clone());
    let flat: Vec<Point> = pts
        .iter()
        .map(|p| {
            let w = p - origin;
            Point::new(&[w.dot(&e1), w.dot(&e2)])
        })
        .collect();
    let poly = hull_2d(&flat);
    let lift = |q: &Point| origin.add_scaled(&e1, q[0]).add_scaled(&e2, q[1]);
    if poly.len() <= 2 {
        let lifted: Vec<Point> = poly.iter().map(lift).collect();
        return hull_collinear(&lifted);
    }
    let mut extra = Vec::new();
    equality_pairs(&[normal.clone()], origin, &mut extra);
    let e1c = e1.clone();
    let e2c = e2.clone();
    region_from_polygon(poly, extra, 3, lift, move |n2| {
        Point::zeros(3).add_scaled(&e1c, n2[0]).add_scaled(&e2c, n2[1])
    })
}

/// Convex hull for `d <= 3`, with a minimal vertex set and a matching H-representation.
/// Lower-dimensional hulls carry equality pairs in their H-representation.
pub fn convex_hull(points: &[Point]) -> Result<ConvexRegion> {
    let first = points.first().ok_or(Error::EmptyInput)?;
    let d = first.dim();
    if let Some(p) = points.iter().find(|p| p.dim() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: p.dim(),
        });
    }
    match d {
        1 | 0 => Ok(hull_collinear(points)),
        2 => {
            let poly = hull_2d(points);
            if poly.len() <= 2 {
                return Ok(hull_collinear(&poly));
            }
            Ok(region_from_polygon(poly, Vec::new(), 2, |q| q.clone(), |n| n.clone()))
        }
        3 => Ok(hull_3d(points)),
        _ => Err(Error::InvalidParameter(format!("convex hull supports d <= 3, got {d}"))),
    }
}

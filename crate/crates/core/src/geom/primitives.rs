use serde::{Deserialize, Serialize};

use super::point::{Point, Vector};
use super::TOL;
use crate::error::{Error, Result};

/// Closed segment `a + t (b - a)`, `t` in `[0, 1]`. `a == b` is allowed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        debug_assert_eq!(a.dim(), b.dim());
        Segment { a, b }
    }

    pub fn point(p: Point) -> Self {
        Segment { a: p.clone(), b: p }
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn at(&self, t: f64) -> Point {
        self.a.lerp(&self.b, t)
    }

    pub fn direction(&self) -> Vector {
        &self.b - &self.a
    }

    pub fn length(&self) -> f64 {
        self.a.dist(&self.b)
    }

    pub fn is_degenerate(&self) -> bool {
        self.a.dist_sq(&self.b) <= TOL * TOL
    }

    pub fn midpoint(&self) -> Point {
        self.a.midpoint(&self.b)
    }

    /// Sub-segment over the parameter range `[t0, t1]`.
    pub fn sub(&self, t0: f64, t1: f64) -> Segment {
        Segment {
            a: self.at(t0),
            b: self.at(t1),
        }
    }

    /// Parameter of the point on the segment closest to `x` (clamped).
    pub fn closest_param(&self, x: &Point) -> f64 {
        let d = self.direction();
        let len2 = d.norm_sq();
        if len2 <= 0.0 {
            return 0.0;
        }
        ((x - &self.a).dot(&d) / len2).clamp(0.0, 1.0)
    }

    pub fn dist_to_point(&self, x: &Point) -> f64 {
        self.at(self.closest_param(x)).dist(x)
    }
}

/// The closed halfspace `{x : <normal, x> <= offset}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vector,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        if normal.norm_sq() == 0.0 || !normal.is_finite() || !offset.is_finite() {
            return Err(Error::InvalidParameter("halfspace normal must be non-zero".into()));
        }
        Ok(Halfspace { normal, offset })
    }

    /// Signed distance; non-positive inside.
    pub fn signed_dist(&self, x: &Point) -> f64 {
        (self.normal.dot(x) - self.offset) / self.normal.norm()
    }

    pub fn contains(&self, x: &Point, tol: f64) -> bool {
        self.signed_dist(x) <= tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

/// Finite cylinder around a segment axis, closed by the two end slabs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub axis: Segment,
    pub radius: f64,
}

/// Orthogonal projection of `x` onto the support line of `s`, with its
/// line parameter `t` (projection = `a + t (b - a)`).
pub fn project_onto_segment_line(x: &Point, s: &Segment) -> Result<(Point, f64)> {
    let d = s.direction();
    let len2 = d.norm_sq();
    if len2 == 0.0 {
        return Err(Error::DegenerateSegment);
    }
    let t = (x - &s.a).dot(&d) / len2;
    Ok((s.at(t), t))
}

/// Parameter interval of `s` inside the halfspace, or `None`.
pub fn clip_param_halfspace(s: &Segment, h: &Halfspace, tol: f64) -> Option<(f64, f64)> {
    let n = h.normal.norm();
    let fa = (h.normal.dot(&s.a) - h.offset) / n;
    let fb = (h.normal.dot(&s.b) - h.offset) / n;
    match (fa <= tol, fb <= tol) {
        (true, true) => Some((0.0, 1.0)),
        (false, false) => None,
        (true, false) => {
            let t = ((tol - fa) / (fb - fa)).clamp(0.0, 1.0);
            Some((0.0, t))
        }
        (false, true) => {
            let t = ((tol - fa) / (fb - fa)).clamp(0.0, 1.0);
            Some((t, 1.0))
        }
    }
}

pub fn clip_segment_halfspace(s: &Segment, h: &Halfspace) -> Option<Segment> {
    clip_param_halfspace(s, h, 1e-12).map(|(t0, t1)| s.sub(t0, t1))
}

/// Solve `A t^2 + B t + C <= 0` over `[lo, hi]`; the quadratic must be convex
/// (`A >= 0`). Returns the feasible sub-interval.
pub(crate) fn convex_quadratic_sublevel(a: f64, b: f64, c: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    if lo > hi {
        return None;
    }
    if a <= 1e-300 {
        // linear b t + c <= 0
        if b.abs() <= 1e-300 {
            return if c <= 0.0 { Some((lo, hi)) } else { None };
        }
        let root = -c / b;
        return if b > 0.0 {
            if root < lo {
                None
            } else {
                Some((lo, root.min(hi)))
            }
        } else if root > hi {
            None
        } else {
            Some((root.max(lo), hi))
        };
    }
    let disc = b * b - 4.0 * a * c;
    let disc = if disc < 0.0 {
        // closed policy: a tangency lost to rounding still counts
        let tmin = -b / (2.0 * a);
        let vmin = a * tmin * tmin + b * tmin + c;
        if vmin <= 1e-15 {
            0.0
        } else {
            return None;
        }
    } else {
        disc
    };
    let sq = disc.sqrt();
    // numerically stable roots
    let q = -0.5 * (b + b.signum() * sq);
    let (mut r1, mut r2) = if q != 0.0 { (q / a, c / q) } else { (-b / (2.0 * a), -b / (2.0 * a)) };
    if r1 > r2 {
        std::mem::swap(&mut r1, &mut r2);
    }
    let t0 = r1.max(lo);
    let t1 = r2.min(hi);
    if t0 <= t1 {
        Some((t0, t1))
    } else {
        None
    }
}

/// Parameter interval of `s` inside the closed ball.
pub fn clip_param_ball(s: &Segment, center: &Point, radius: f64, tol: f64) -> Option<(f64, f64)> {
    let d = s.direction();
    let w = &s.a - center;
    let r = radius + tol;
    convex_quadratic_sublevel(d.norm_sq(), 2.0 * w.dot(&d), w.norm_sq() - r * r, 0.0, 1.0)
}

/// Minimum and maximum points (in segment order) of `s` intersected with the ball.
pub fn segment_ball_intersection_extremes(s: &Segment, b: &Ball) -> Option<(Point, Point)> {
    clip_param_ball(s, &b.center, b.radius, 0.0).map(|(t0, t1)| (s.at(t0), s.at(t1)))
}

pub fn clip_param_cylinder(s: &Segment, c: &Cylinder, tol: f64) -> Option<(f64, f64)> {
    let axis_dir = c.axis.direction();
    let len2 = axis_dir.norm_sq();
    if len2 <= TOL * TOL {
        return clip_param_ball(s, &c.axis.a, c.radius, tol);
    }
    // slab: 0 <= <x - a0, u> / |u|^2 <= 1, linear in t
    let d = s.direction();
    let w = &s.a - &c.axis.a;
    let p0 = w.dot(&axis_dir) / len2;
    let p1 = d.dot(&axis_dir) / len2;
    let len = len2.sqrt();
    let slack = tol / len;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    // p0 + p1 t >= -slack and p0 + p1 t <= 1 + slack
    for (coef, rhs, upper) in [(p1, -slack - p0, false), (p1, 1.0 + slack - p0, true)] {
        if coef.abs() <= 1e-300 {
            let ok = if upper { rhs >= 0.0 } else { rhs <= 0.0 };
            if !ok {
                return None;
            }
            continue;
        }
        let root = rhs / coef;
        // upper: coef t <= rhs ; lower: coef t >= rhs
        let le = upper == (coef > 0.0);
        if le {
            hi = hi.min(root);
        } else {
            lo = lo.max(root);
        }
    }
    if lo > hi {
        return None;
    }
    // lateral: |w + t d - ((w + t d).u/|u|^2) u|^2 <= r^2
    let u_hat = &axis_dir * (1.0 / len);
    let wp = w.add_scaled(&u_hat, -w.dot(&u_hat));
    let dp = d.add_scaled(&u_hat, -d.dot(&u_hat));
    let r = c.radius + tol;
    convex_quadratic_sublevel(dp.norm_sq(), 2.0 * wp.dot(&dp), wp.norm_sq() - r * r, lo, hi)
}

pub fn clip_segment_cylinder(s: &Segment, c: &Cylinder) -> Option<Segment> {
    clip_param_cylinder(s, c, TOL).map(|(t0, t1)| s.sub(t0, t1))
}

/// Parameter interval of `s` within distance `r` of the axis-aligned box `[lo, hi]`.
pub fn clip_param_box_neighborhood(s: &Segment, lo: &[f64], hi: &[f64], r: f64, tol: f64) -> Option<(f64, f64)> {
    let d = s.direction();
    let dim = s.dim();
    let mut breaks = vec![0.0, 1.0];
    for k in 0..dim {
        if d[k].abs() > 1e-300 {
            for bound in [lo[k], hi[k]] {
                let t = (bound - s.a[k]) / d[k];
                if t > 0.0 && t < 1.0 {
                    breaks.push(t);
                }
            }
        }
    }
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let rr = r + tol;
    let mut out: Option<(f64, f64)> = None;
    for w in breaks.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if t1 < t0 {
            continue;
        }
        let tm = 0.5 * (t0 + t1);
        let (mut qa, mut qb, mut qc) = (0.0, 0.0, 0.0);
        for k in 0..dim {
            let pk = s.a[k] + tm * d[k];
            // excess = alpha + beta t
            let (alpha, beta) = if pk < lo[k] {
                (lo[k] - s.a[k], -d[k])
            } else if pk > hi[k] {
                (s.a[k] - hi[k], d[k])
            } else {
                continue;
            };
            qa += beta * beta;
            qb += 2.0 * alpha * beta;
            qc += alpha * alpha;
        }
        if let Some((u0, u1)) = convex_quadratic_sublevel(qa, qb, qc - rr * rr, t0, t1) {
            out = Some(match out {
                None => (u0, u1),
                Some((a0, a1)) => (a0.min(u0), a1.max(u1)),
            });
        }
    }
    out
}

/// Euclidean distance from `x` to the axis-aligned box `[lo, hi]`.
pub fn dist_point_box(x: &Point, lo: &[f64], hi: &[f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..x.dim() {
        let e = if x[k] < lo[k] {
            lo[k] - x[k]
        } else if x[k] > hi[k] {
            x[k] - hi[k]
        } else {
            0.0
        };
        s += e * e;
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(&[x, y])
    }

    #[test]
    fn projection_examples() {
        let (q, t) = project_onto_segment_line(&p(1.0, 1.0), &Segment::new(p(0.0, 0.0), p(2.0, 0.0))).unwrap();
        assert_eq!(q, p(1.0, 0.0));
        assert!((t - 0.5).abs() < 1e-15);
        let (q, t) = project_onto_segment_line(&p(3.0, 5.0), &Segment::new(p(0.0, 0.0), p(1.0, 0.0))).unwrap();
        assert_eq!(q, p(3.0, 0.0));
        assert!((t - 3.0).abs() < 1e-15);
        let s = Segment::new(p(1.0, 1.0), p(2.0, 2.0));
        let x = p(0.0, 0.0);
        let (q, t) = project_onto_segment_line(&x, &s).unwrap();
        assert!(q.dist(&p(0.0, 0.0)) < 1e-12);
        assert!((t + 1.0).abs() < 1e-12);
        assert!((&x - &q).dot(&s.direction()).abs() < 1e-12);
        assert_eq!(
            project_onto_segment_line(&x, &Segment::point(p(1.0, 1.0))),
            Err(Error::DegenerateSegment)
        );
    }

    #[test]
    fn halfspace_clip_examples() {
        let h = Halfspace::new(p(0.0, 1.0), 0.0).unwrap();
        let s = Segment::new(p(0.0, -1.0), p(0.0, 1.0));
        let c = clip_segment_halfspace(&s, &h).unwrap();
        assert!(c.a.dist(&p(0.0, -1.0)) < 1e-12 && c.b.dist(&p(0.0, 0.0)) < 1e-11);
        let inside = Segment::new(p(0.0, -3.0), p(1.0, -1.0));
        assert_eq!(clip_segment_halfspace(&inside, &h), Some(inside.clone()));
        // endpoint on the boundary: degenerate clip
        let tangent = Segment::new(p(0.0, 0.0), p(0.0, 1.0));
        let c = clip_segment_halfspace(&tangent, &h).unwrap();
        assert!(c.length() < 1e-11);
        assert!(Halfspace::new(p(0.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn cylinder_clip_examples() {
        let c = Cylinder {
            axis: Segment::new(p(0.0, 0.0), p(2.0, 0.0)),
            radius: 1.0,
        };
        let r = clip_segment_cylinder(&Segment::new(p(-5.0, 0.0), p(5.0, 0.0)), &c).unwrap();
        assert!(r.a.dist(&p(0.0, 0.0)) < 1e-8 && r.b.dist(&p(2.0, 0.0)) < 1e-8);
        let r = clip_segment_cylinder(&Segment::new(p(1.0, 2.0), p(1.0, -2.0)), &c).unwrap();
        assert!(r.a.dist(&p(1.0, 1.0)) < 1e-8 && r.b.dist(&p(1.0, -1.0)) < 1e-8);
        assert!(clip_segment_cylinder(&Segment::new(p(3.0, 0.0), p(4.0, 0.0)), &c).is_none());
    }

    #[test]
    fn ball_extremes_examples() {
        let b = Ball {
            center: p(0.0, 0.0),
            radius: 1.0,
        };
        let (lo, hi) = segment_ball_intersection_extremes(&Segment::new(p(-2.0, 0.0), p(2.0, 0.0)), &b).unwrap();
        assert!(lo.dist(&p(-1.0, 0.0)) < 1e-12 && hi.dist(&p(1.0, 0.0)) < 1e-12);
        let (lo, hi) = segment_ball_intersection_extremes(&Segment::new(p(-2.0, 1.0), p(2.0, 1.0)), &b).unwrap();
        assert!(lo.dist(&p(0.0, 1.0)) < 1e-6 && hi.dist(&p(0.0, 1.0)) < 1e-6);
        assert!(segment_ball_intersection_extremes(&Segment::new(p(-2.0, 2.0), p(2.0, 2.0)), &b).is_none());
    }

    #[test]
    fn box_neighborhood_interval() {
        let s = Segment::new(p(-3.0, 0.5), p(3.0, 0.5));
        let (t0, t1) = clip_param_box_neighborhood(&s, &[0.0, 0.0], &[1.0, 1.0], 1.0, 0.0).unwrap();
        assert!((s.at(t0)[0] + 1.0).abs() < 1e-12);
        assert!((s.at(t1)[0] - 2.0).abs() < 1e-12);
        let s = Segment::new(p(-3.0, 3.0), p(3.0, 3.0));
        assert!(clip_param_box_neighborhood(&s, &[0.0, 0.0], &[1.0, 1.0], 1.0, 0.0).is_none());
    }
}

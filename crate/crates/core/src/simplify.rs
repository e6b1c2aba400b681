//! Greedy bicriteria simplification of a single curve.
//!
//! The curve is cut into blocks; each block is the longest remaining prefix
//! for which the representative-curve solver finds a curve of at most
//! `ceil(1 / alpha)` vertices. Block curves are joined end to end.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::curve::PolygonalCurve;
use crate::error::{Error, Result};
use crate::frechet::free_space_decision;
use crate::twophase::{solve_q, QInstance, SolveMode, SolveOptions, SolveOutcome};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimplifyResult {
    pub curve: PolygonalCurve,
    /// Inclusive vertex ranges of the input covered by each block.
    pub blocks: Vec<(usize, usize)>,
    /// Number of solver calls.
    pub solves: usize,
    /// Set when a block saw a feasible prefix beyond an infeasible one and was
    /// redone by a linear scan.
    pub fallback_used: bool,
}

struct Prefixes<'a> {
    tau: &'a PolygonalCurve,
    delta: f64,
    ell: usize,
    eps: f64,
    opts: SolveOptions,
    solves: usize,
}

impl Prefixes<'_> {
    /// Solves the problem for `tau[s..=e]`.
    fn solve(&mut self, s: usize, e: usize) -> Result<Option<PolygonalCurve>> {
        self.solves += 1;
        let inst = QInstance::new(vec![self.tau.subcurve(s, e)], vec![self.delta], self.ell, self.eps)?;
        match solve_q(&inst, &self.opts)? {
            SolveOutcome::Found { curve, .. } => Ok(Some(curve)),
            SolveOutcome::Null { .. } => Ok(None),
        }
    }

    /// Last index `e >= s` with a solution for `tau[s..=e]` while `e + 1`
    /// has none (or `e` is the last vertex), by doubling then bisection.
    fn longest(&mut self, s: usize, seen: &mut BTreeMap<usize, Option<PolygonalCurve>>) -> Result<usize> {
        let last = self.tau.len() - 1;
        let probe = |this: &mut Self, e: usize, seen: &mut BTreeMap<usize, Option<PolygonalCurve>>| -> Result<bool> {
            if let Some(r) = seen.get(&e) {
                return Ok(r.is_some());
            }
            let r = this.solve(s, e)?;
            let ok = r.is_some();
            seen.insert(e, r);
            Ok(ok)
        };
        let mut good = s;
        if !probe(self, s, seen)? {
            return Err(Error::InvalidParameter("no solution for a single vertex".into()));
        }
        let mut step = 1;
        let mut bad = None;
        while good < last {
            let e = (good + step).min(last);
            if probe(self, e, seen)? {
                good = e;
                step *= 2;
            } else {
                bad = Some(e);
                break;
            }
        }
        let Some(mut bad) = bad else { return Ok(good) };
        while bad - good > 1 {
            let mid = good + (bad - good) / 2;
            if probe(self, mid, seen)? {
                good = mid;
            } else {
                bad = mid;
            }
        }
        // one look past the boundary to catch a non-monotone answer
        if bad < last {
            probe(self, bad + 1, seen)?;
        }
        Ok(good)
    }

    /// Smallest `i` such that `tau[s..=i + 1]` has no solution.
    fn linear(&mut self, s: usize, seen: &mut BTreeMap<usize, Option<PolygonalCurve>>) -> Result<usize> {
        let last = self.tau.len() - 1;
        let mut e = s;
        while e < last {
            let ok = match seen.get(&(e + 1)) {
                Some(r) => r.is_some(),
                None => {
                    let r = self.solve(s, e + 1)?;
                    let ok = r.is_some();
                    seen.insert(e + 1, r);
                    ok
                }
            };
            if !ok {
                break;
            }
            e += 1;
        }
        Ok(e)
    }
}

fn monotone(seen: &BTreeMap<usize, Option<PolygonalCurve>>) -> bool {
    let mut infeasible = false;
    for r in seen.values() {
        if r.is_none() {
            infeasible = true;
        } else if infeasible {
            return false;
        }
    }
    true
}

/// Simplifies `tau` to a curve within `(1 + eps) delta` that has at most
/// `(1 + alpha)` times the vertices of the smallest curve within `delta`.
/// `node_budget` bounds every single solver call.
pub fn bicriteria_simplify(tau: &PolygonalCurve, delta: f64, alpha: f64, eps: f64, node_budget: u64) -> Result<SimplifyResult> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter("delta must be positive".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) || !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter("alpha and eps must lie in (0, 1)".into()));
    }
    let ell = (1.0 / alpha).ceil() as usize;
    let mut pre = Prefixes {
        tau,
        delta,
        ell,
        eps,
        opts: SolveOptions {
            mode: SolveMode::Full,
            node_budget,
            ..SolveOptions::default()
        },
        solves: 0,
    };
    let last = tau.len() - 1;
    let mut s = 0;
    let mut blocks = Vec::new();
    let mut pts = Vec::new();
    let mut fallback_used = false;
    loop {
        let mut seen = BTreeMap::new();
        let mut e = pre.longest(s, &mut seen)?;
        if !monotone(&seen) {
            fallback_used = true;
            e = pre.linear(s, &mut seen)?;
        }
        let block = seen.remove(&e).flatten().expect("feasible block has a curve");
        for v in block.vertices() {
            if pts.last() != Some(v) {
                pts.push(v.clone());
            }
        }
        blocks.push((s, e));
        if e == last {
            break;
        }
        s = e + 1;
    }
    Ok(SimplifyResult {
        curve: PolygonalCurve::new(pts)?,
        blocks,
        solves: pre.solves,
        fallback_used,
    })
}

/// Whether `sigma` is within `(1 + eps) delta` of `tau`.
pub fn check_simplification(sigma: &PolygonalCurve, tau: &PolygonalCurve, delta: f64, eps: f64) -> bool {
    free_space_decision(sigma, tau, (1.0 + eps) * delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_segment() {
        let tau = PolygonalCurve::from_coords(&[vec![0.0, 0.0], vec![1.0, 0.5]]).unwrap();
        let r = bicriteria_simplify(&tau, 0.05, 0.5, 0.25, 1_000_000).unwrap();
        assert!(r.curve.len() <= 2);
        assert!(check_simplification(&r.curve, &tau, 0.05, 0.25));
    }

    #[test]
    fn v_shape_uses_two_blocks() {
        let tau = PolygonalCurve::from_coords(&[
            vec![0.0, 1.0],
            vec![0.25, 0.5],
            vec![0.5, 0.0],
            vec![0.75, 0.5],
            vec![1.0, 1.0],
        ])
        .unwrap();
        let r = bicriteria_simplify(&tau, 0.05, 0.5, 0.25, 10_000_000).unwrap();
        assert!(check_simplification(&r.curve, &tau, 0.05, 0.25));
        assert!(r.curve.len() <= 4, "{:?}", r);
    }

    #[test]
    fn monotone_detection() {
        let p = PolygonalCurve::from_coords(&[vec![0.0]]).unwrap();
        let mut m = BTreeMap::new();
        m.insert(1, Some(p.clone()));
        m.insert(2, None);
        assert!(monotone(&m));
        m.insert(3, Some(p));
        assert!(!monotone(&m));
    }
}

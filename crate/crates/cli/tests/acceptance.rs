//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, with the
//! measured numbers. Exits non-zero when any criterion fails.
//!
//! Run a subset with `cargo test --test acceptance -- 3 7`.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use frechet_kit::cluster::{candidate_finder, kl_median, sample_size, threshold_bounds, threshold_steps, CandidateSource, FinderOverrides, FinderParams};
use frechet_kit::config::Configuration;
use frechet_kit::discretize::{build_l, GridCell, SegmentFamily};
use frechet_kit::frechet::{densify, discrete_frechet, frechet_distance};
use frechet_kit::geom::{f_region, ConvexRegion, Point, Segment};
use frechet_kit::oracles::{brute_force_kappa, brute_force_q, plant_clusters, plant_instance, PlantParams, Planted};
use frechet_kit::simplify::{bicriteria_simplify, check_simplification};
use frechet_kit::twophase::{backward_extract, forward_construct, solve_q, verify_candidate, QInstance, SolveMode, SolveOptions, SolveOutcome};
use frechet_kit::PolygonalCurve;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// pinned tolerances
const FRECHET_TOL: f64 = 1e-6;
const DENSIFY_STEP: f64 = 1e-3;
const BAND: f64 = 1e-6;
const EFFECT_TOL: f64 = 1e-6;

struct Verdict {
    pass: bool,
    detail: String,
}

fn curve(rows: &[[f64; 2]]) -> PolygonalCurve {
    PolygonalCurve::from_coords(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn random_curve(rng: &mut ChaCha8Rng, min: usize, max: usize) -> PolygonalCurve {
    let m = rng.gen_range(min..=max);
    let rows: Vec<Vec<f64>> = (0..m).map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()]).collect();
    PolygonalCurve::from_coords(&rows).unwrap()
}

// 1 -------------------------------------------------------------------------

fn c1_frechet() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut ok, mut worst_gap, mut worst_excess) = (0, 0.0f64, 0.0f64);
    let mut misses = Vec::new();
    let t = Instant::now();
    for _ in 0..200 {
        let a = random_curve(&mut rng, 2, 6);
        let b = random_curve(&mut rng, 2, 6);
        let v = frechet_distance(&a, &b, FRECHET_TOL).value;
        let d = discrete_frechet(&densify(&a, DENSIFY_STEP), &densify(&b, DENSIFY_STEP));
        worst_gap = worst_gap.max(d - v);
        worst_excess = worst_excess.max(v - d);
        if v >= d - FRECHET_TOL && v <= d {
            ok += 1;
        } else {
            misses.push((a, b, v, d));
        }
    }
    let el = t.elapsed();
    // misses re-measured at a quarter of the step: the gap should shrink
    let refined: Vec<String> = misses
        .iter()
        .map(|(a, b, v, d)| {
            let d4 = discrete_frechet(&densify(a, DENSIFY_STEP / 4.0), &densify(b, DENSIFY_STEP / 4.0));
            format!("{:.1e}->{:.1e}", d - v, d4 - v)
        })
        .collect();
    Verdict {
        pass: ok == 200 && el < Duration::from_secs(60),
        detail: format!(
            "{ok}/200 in [D-1e-6, D]; max D-value {worst_gap:.3e}, max value-D {worst_excess:.3e}; {:.1}s; misses at step/4: [{}]",
            el.as_secs_f64(),
            refined.join(" ")
        ),
    }
}

// 2 -------------------------------------------------------------------------

/// Parameters of `p + t (q - p)` inside the box, by slab clipping.
fn seg_meets_box(p: [f64; 2], q: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> bool {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for k in 0..2 {
        let d = q[k] - p[k];
        if d.abs() < 1e-300 {
            if p[k] < lo[k] || p[k] > hi[k] {
                return false;
            }
            continue;
        }
        let (mut a, mut b) = ((lo[k] - p[k]) / d, (hi[k] - p[k]) / d);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        t0 = t0.max(a);
        t1 = t1.min(b);
        if t0 > t1 {
            return false;
        }
    }
    true
}

fn pt_box(x: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> f64 {
    let dx = (lo[0] - x[0]).max(0.0).max(x[0] - hi[0]);
    let dy = (lo[1] - x[1]).max(0.0).max(x[1] - hi[1]);
    dx.hypot(dy)
}

fn pt_seg(x: [f64; 2], p: [f64; 2], q: [f64; 2]) -> f64 {
    let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
    let l2 = dx * dx + dy * dy;
    let t = if l2 > 0.0 { (((x[0] - p[0]) * dx + (x[1] - p[1]) * dy) / l2).clamp(0.0, 1.0) } else { 0.0 };
    (x[0] - p[0] - t * dx).hypot(x[1] - p[1] - t * dy)
}

/// Distance between segment `pq` and the box.
fn seg_box_dist(p: [f64; 2], q: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> f64 {
    if seg_meets_box(p, q, lo, hi) {
        return 0.0;
    }
    let corners = [lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]];
    corners
        .iter()
        .map(|&c| pt_seg(c, p, q))
        .fold(pt_box(p, lo, hi).min(pt_box(q, lo, hi)), f64::min)
}

fn c2_decomposition() -> Verdict {
    const SAMPLES: usize = 4001;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let t = Instant::now();
    let (mut disagree, mut inside, mut outside, mut band) = (0, 0, 0, 0);
    for _ in 0..50 {
        let c = [rng.gen::<f64>(), rng.gen::<f64>()];
        let h = rng.gen_range(0.02..0.15);
        let (lo, hi) = ([c[0] - h, c[1] - h], [c[0] + h, c[1] + h]);
        let (s0, s1) = ([rng.gen::<f64>(), rng.gen::<f64>()], [rng.gen::<f64>(), rng.gen::<f64>()]);
        let r = ConvexRegion::from_box(&lo, &hi);
        let s = ConvexRegion::from_segment(&Segment::new(Point::new(&s0), Point::new(&s1)));
        let f = f_region(&r, &s).unwrap();
        let at = |u: f64| [s0[0] + u * (s1[0] - s0[0]), s0[1] + u * (s1[1] - s0[1])];
        let (elo, ehi) = ([lo[0] + BAND, lo[1] + BAND], [hi[0] - BAND, hi[1] - BAND]);
        for _ in 0..1000 {
            let p = [rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5)];
            let lp_in = f.contains(&Point::new(&p));
            // some q on S whose segment to p crosses the box eroded by the band
            let surely_in = (0..SAMPLES).any(|i| seg_meets_box(p, at(i as f64 / (SAMPLES - 1) as f64), elo, ehi));
            let dist = |u: f64| seg_box_dist(p, at(u), lo, hi);
            let mut best: Vec<(f64, usize)> = (0..SAMPLES).map(|i| (dist(i as f64 / (SAMPLES - 1) as f64), i)).collect();
            best.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut gap = best[0].0;
            let step = 1.0 / (SAMPLES - 1) as f64;
            for &(_, i) in best.iter().take(3) {
                let (mut a, mut b) = (((i as f64 - 1.0) * step).max(0.0), ((i as f64 + 1.0) * step).min(1.0));
                for _ in 0..80 {
                    let (m1, m2) = (a + (b - a) / 3.0, b - (b - a) / 3.0);
                    if dist(m1) <= dist(m2) {
                        b = m2;
                    } else {
                        a = m1;
                    }
                }
                gap = gap.min(dist(0.5 * (a + b)));
            }
            let surely_out = gap > BAND;
            match (lp_in, surely_in, surely_out) {
                (true, _, true) | (false, true, _) => disagree += 1,
                (true, true, _) => inside += 1,
                (false, _, true) => outside += 1,
                _ => band += 1,
            }
        }
    }
    let el = t.elapsed();
    Verdict {
        pass: disagree == 0 && el < Duration::from_secs(30),
        detail: format!(
            "{disagree} disagreements over 50000 probes ({inside} in, {outside} out, {band} in band); {:.1}s",
            el.as_secs_f64()
        ),
    }
}

// 3 and 7 -------------------------------------------------------------------

fn planted_set() -> Vec<QInstance> {
    (0..30u64)
        .map(|seed| {
            let p = plant_instance(&PlantParams {
                l_star: 1 + (seed % 3) as usize,
                n: 1 + ((seed / 3) % 3) as usize,
                m: 4,
                d: 2,
                deltas: vec![0.05, 0.08, 0.06],
                noise: 0.9,
                eps: 0.5,
                seed,
            })
            .unwrap();
            QInstance::new(p.inst.original.clone(), p.inst.thresholds.clone(), 3, 0.5).unwrap()
        })
        .collect()
}

fn solve_planted(mode: SolveMode) -> Verdict {
    let t = Instant::now();
    let opts = SolveOptions {
        mode,
        ..SolveOptions::default()
    };
    let mut ok = 0;
    let mut bad = Vec::new();
    for (i, inst) in planted_set().iter().enumerate() {
        match solve_q(inst, &opts) {
            Ok(SolveOutcome::Found { curve, .. }) if curve.len() <= inst.ell && verify_candidate(&curve, inst, inst.eps) => ok += 1,
            Ok(SolveOutcome::Found { .. }) => bad.push(format!("{i}:unverified")),
            Ok(SolveOutcome::Null { .. }) => bad.push(format!("{i}:null")),
            Err(e) => bad.push(format!("{i}:{e}")),
        }
    }
    let el = t.elapsed();
    Verdict {
        pass: ok == 30 && el < Duration::from_secs(600),
        detail: format!("{ok}/30 verified at slack eps; {:.1}s {}", el.as_secs_f64(), bad.join(" ")),
    }
}

// 4 -------------------------------------------------------------------------

fn infeasible_set() -> Vec<QInstance> {
    let (delta, eps) = (0.1, 0.5);
    let bound = 2.0 * delta + 2.0 * eps * delta;
    let mut out = Vec::new();
    // two curves that agree at both ends and part in the middle
    for (h, m) in [(0.32, 3), (0.35, 4), (0.4, 3), (0.5, 4), (0.6, 3)] {
        let xs: Vec<f64> = (0..m).map(|i| i as f64 / (m - 1) as f64).collect();
        let a: Vec<[f64; 2]> = xs.iter().map(|&x| [x, 0.0]).collect();
        let b: Vec<[f64; 2]> = xs.iter().enumerate().map(|(i, &x)| [x, if i == 0 || i == m - 1 { 0.0 } else { h }]).collect();
        out.push((curve(&a), curve(&b)));
    }
    // random pairs just beyond the separation bound
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    while out.len() < 10 {
        let a = random_curve(&mut rng, 3, 4);
        let rows: Vec<Vec<f64>> = a
            .vertices()
            .iter()
            .map(|p| vec![p[0] + rng.gen_range(-0.3..0.3), p[1] + rng.gen_range(-0.3..0.3)])
            .collect();
        let b = PolygonalCurve::from_coords(&rows).unwrap();
        let d = frechet_distance(&a, &b, 1e-9).lower;
        if d > bound && d < 1.6 * bound {
            out.push((a, b));
        }
    }
    out.into_iter()
        .map(|(a, b)| {
            assert!(frechet_distance(&a, &b, 1e-9).lower > bound);
            QInstance::new(vec![a, b], vec![delta, delta], 2, eps).unwrap()
        })
        .collect()
}

fn c4_null() -> Verdict {
    let t = Instant::now();
    let (mut nulls, mut oracle_nulls) = (0, 0);
    let mut notes = Vec::new();
    for (i, inst) in infeasible_set().iter().enumerate() {
        match solve_q(inst, &SolveOptions::default()) {
            Ok(SolveOutcome::Null { .. }) => nulls += 1,
            Ok(SolveOutcome::Found { .. }) => notes.push(format!("{i}:curve")),
            Err(e) => notes.push(format!("{i}:{e}")),
        }
        // one-sided: Null only certifies that no grid-vertex curve exists
        let res = inst.eps * inst.delta_min() / 4.0;
        match brute_force_q(inst, res) {
            Ok(None) => oracle_nulls += 1,
            Ok(Some(_)) => notes.push(format!("{i}:oracle-curve")),
            Err(e) => notes.push(format!("{i}:oracle {e}")),
        }
    }
    Verdict {
        pass: nulls == 10 && oracle_nulls == 10,
        detail: format!(
            "solver Null {nulls}/10, grid oracle Null {oracle_nulls}/10; {:.1}s {}",
            t.elapsed().as_secs_f64(),
            notes.join(" ")
        ),
    }
}

// 5 -------------------------------------------------------------------------

fn shift_cell(rng: &mut ChaCha8Rng, c: &GridCell) -> GridCell {
    let mut idx = c.index.clone();
    let k = rng.gen_range(0..idx.len());
    idx[k] += if rng.gen() { 1 } else { -1 };
    GridCell::new(idx, c.side)
}

fn mutate(rng: &mut ChaCha8Rng, cfg: &Configuration, segs: &SegmentFamily, m: usize) -> Configuration {
    let mut c = cfg.clone();
    let l = c.l;
    for _ in 0..rng.gen_range(0..=3) {
        match rng.gen_range(0..4) {
            0 if l >= 2 => {
                let j = rng.gen_range(0..l - 1);
                if rng.gen() {
                    c.cells[j].0 = shift_cell(rng, &c.cells[j].0);
                } else {
                    c.cells[j].1 = shift_cell(rng, &c.cells[j].1);
                }
            }
            1 => {
                let k = rng.gen_range(0..l);
                let id = (c.segment_ids[k] as i64 + rng.gen_range(-3..=3)).clamp(0, segs.len() as i64 - 1) as usize;
                c.segment_ids[k] = id;
                c.segments[k] = segs.get(id).clone();
            }
            2 => {
                let k = rng.gen_range(0..l);
                c.anchors[k] = match &c.anchors[k] {
                    Some(a) if k > 0 && k < l - 1 && rng.gen_bool(0.3) => None,
                    Some(a) => Some(shift_cell(rng, a)),
                    None => cfg.anchors[k].clone(),
                };
            }
            _ => {
                let i = rng.gen_range(0..c.partitions.len());
                let mut v = c.partitions[i].values.clone();
                let a = rng.gen_range(1..m);
                // move one cut by one position, keeping the map monotone
                if rng.gen() && v[a] > v[a - 1] {
                    v[a] -= 1;
                } else if a + 1 < m && v[a] < v[a + 1] && v[a] + 1 < l {
                    v[a] += 1;
                }
                if let Ok(p) = frechet_kit::config::PartitionFn::new(v) {
                    c.partitions[i] = p;
                }
            }
        }
    }
    if c.validate(m).is_err() {
        return cfg.clone();
    }
    c
}

/// Earliest and latest parameters on `e` within `r` of the box.
fn near_params(e: &Segment, cell: &GridCell, r: f64) -> Option<(f64, f64)> {
    let (lo, hi) = (cell.lo(), cell.hi());
    let dist = |t: f64| {
        let p = e.at(t);
        (0..p.dim())
            .map(|k| (lo[k] - p[k]).max(0.0).max(p[k] - hi[k]).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    // the distance is convex in t: locate its minimum, then both crossings
    let (mut a, mut b) = (0.0, 1.0);
    for _ in 0..100 {
        let (m1, m2) = (a + (b - a) / 3.0, b - (b - a) / 3.0);
        if dist(m1) <= dist(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    let tm = 0.5 * (a + b);
    if dist(tm) > r {
        return None;
    }
    let cross = |mut inn: f64, mut out: f64| {
        if dist(out) <= r {
            return out;
        }
        for _ in 0..100 {
            let mid = 0.5 * (inn + out);
            if dist(mid) <= r {
                inn = mid;
            } else {
                out = mid;
            }
        }
        inn
    };
    Some((cross(tm, 0.0), cross(tm, 1.0)))
}

fn c5_fuzz() -> Verdict {
    let t = Instant::now();
    let mut pool: Vec<(Planted, SegmentFamily)> = Vec::new();
    for seed in 0..40u64 {
        let p = plant_instance(&PlantParams {
            l_star: 2 + (seed % 2) as usize,
            n: 1 + ((seed / 2) % 2) as usize,
            m: 3 + ((seed / 4) % 2) as usize,
            d: 2,
            deltas: vec![0.05, 0.07],
            noise: 0.8,
            eps: 0.5,
            seed: 1000 + seed,
        })
        .unwrap();
        let inst = &p.inst;
        let segs = build_l(&inst.curves[inst.argmin()], inst.delta_min(), inst.eps_internal()).unwrap();
        pool.push((p, segs));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut forward_ok, mut empty_steps, mut effect_bad) = (0, 0, 0);
    for _ in 0..10_000 {
        let (p, segs) = &pool[rng.gen_range(0..pool.len())];
        let inst = &p.inst;
        let cfg = mutate(&mut rng, &p.config, segs, inst.m());
        let Ok(chain) = forward_construct(&cfg, inst) else { continue };
        forward_ok += 1;
        let sigma = match backward_extract(&chain, &cfg) {
            Ok(s) => s,
            Err(_) => {
                empty_steps += 1;
                continue;
            }
        };
        let r = (inst.dim() as f64).sqrt() * inst.eps_internal() * inst.delta_max() + EFFECT_TOL;
        for j in 0..cfg.l - 1 {
            let e = Segment::new(sigma.vertex(j).clone(), sigma.vertex(j + 1).clone());
            let (c1, c2) = &cfg.cells[j];
            let ok = match (near_params(&e, c1, r), near_params(&e, c2, r)) {
                (Some((p_first, _)), Some((_, q_last))) => p_first <= q_last + 1e-12,
                _ => false,
            };
            if !ok {
                effect_bad += 1;
            }
        }
    }
    Verdict {
        pass: empty_steps == 0 && effect_bad == 0 && forward_ok > 0,
        detail: format!(
            "10000 configurations, {forward_ok} forward successes, {empty_steps} empty steps, {effect_bad} edges violating the cell-distance bound; {:.1}s",
            t.elapsed().as_secs_f64()
        ),
    }
}

// 6 -------------------------------------------------------------------------

/// A zig-zag around the polyline through `corners`: `per` vertices per leg,
/// alternating `wiggle` to either side.
fn wiggly(corners: &[[f64; 2]], per: usize, wiggle: f64) -> PolygonalCurve {
    let mut rows = vec![];
    for w in corners.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len = dx.hypot(dy);
        let (nx, ny) = (-dy / len, dx / len);
        for t in 0..per {
            let f = t as f64 / per as f64;
            let s = if t == 0 {
                0.0
            } else if t % 2 == 0 {
                wiggle
            } else {
                -wiggle
            };
            rows.push([a[0] + f * dx + s * nx, a[1] + f * dy + s * ny]);
        }
    }
    rows.push(*corners.last().unwrap());
    curve(&rows)
}

fn bicriteria_set() -> Vec<PolygonalCurve> {
    let cases: Vec<(Vec<[f64; 2]>, usize)> = vec![
        (vec![[0.0, 0.0], [1.0, 0.2]], 4),
        (vec![[0.0, 0.0], [0.8, -0.5]], 5),
        (vec![[0.0, 0.0], [0.5, 0.8], [1.0, 0.0]], 3),
        (vec![[0.0, 0.6], [0.4, 0.0], [1.0, 0.5]], 3),
        (vec![[0.0, 0.0], [0.7, 0.1], [0.9, 0.8]], 3),
        (vec![[0.0, 0.0], [0.5, 0.0], [0.5, 0.5], [1.0, 0.5]], 2),
        (vec![[0.0, 0.0], [0.6, 0.3], [0.2, 0.7], [0.9, 0.9]], 2),
        (vec![[0.0, 0.0], [0.4, 0.5], [0.8, 0.0], [1.2, 0.5]], 2),
        (vec![[0.0, 0.0], [0.6, 0.0], [0.3, 0.4]], 3),
        (vec![[0.0, 0.0], [0.3, 0.6], [0.6, 0.0], [0.9, 0.6]], 2),
    ];
    cases.iter().map(|(c, per)| wiggly(c, *per, 0.3 * 0.05)).collect()
}

fn c6_bicriteria() -> Verdict {
    let (delta, alpha, eps) = (0.05, 0.5, 0.25);
    let t = Instant::now();
    let mut ok = 0;
    let mut notes = Vec::new();
    for (i, tau) in bicriteria_set().iter().enumerate() {
        let k = brute_force_kappa(tau, delta, 0.01).unwrap();
        if k.lower != k.upper || !(2..=4).contains(&k.upper) {
            notes.push(format!("{i}:kappa uncertified {}..{}", k.lower, k.upper));
            continue;
        }
        let r = bicriteria_simplify(tau, delta, alpha, eps, 20_000_000).unwrap();
        let fits = check_simplification(&r.curve, tau, delta, eps);
        let small = r.curve.len() as f64 <= (1.0 + alpha) * k.upper as f64;
        if fits && small {
            ok += 1;
        }
        notes.push(format!("{}/{}", r.curve.len(), k.upper));
    }
    let el = t.elapsed();
    Verdict {
        pass: ok == 10 && el < Duration::from_secs(600),
        detail: format!("{ok}/10 within (1+eps)delta and (1+alpha)kappa [|sigma|/kappa: {}]; {:.1}s", notes.join(" "), el.as_secs_f64()),
    }
}

// 8 -------------------------------------------------------------------------

pub fn cluster_overrides() -> FinderOverrides {
    FinderOverrides {
        sample_size: Some(8),
        subset_size: Some(3),
        threshold_factors: Some(vec![0.6, 0.8, 1.0]),
        node_budget: 20_000,
        ..FinderOverrides::default()
    }
}

fn c8_clustering() -> Verdict {
    let (noise, eps, mu) = (0.05, 0.5, 0.2);
    let t = Instant::now();
    let (mut ok, mut covered) = (0, 0);
    let mut ratios = Vec::new();
    for seed in 0..20u64 {
        let p = plant_clusters(2, 5, 4, 2, 10.0 * noise, noise, seed).unwrap();
        let r = kl_median(&p.curves, 2, 2, mu, eps, seed, &cluster_overrides()).unwrap();
        let ratio = r.cost / p.cost;
        ratios.push(format!("{ratio:.2}"));
        if ratio <= 1.0 + eps {
            ok += 1;
        }
        // every sampled curve's planted distance lies on the threshold grid range
        let all = r.candidates.subsets.iter().all(|s| {
            let top = threshold_steps(s.upper, s.lower) as f64 * s.lower;
            s.members
                .iter()
                .all(|&i| frechet_distance(&p.curves[i], &p.centers[p.assignment[i]], 1e-9).value <= top)
        });
        if all {
            covered += 1;
        }
    }
    let el = t.elapsed();
    Verdict {
        pass: ok >= 16 && covered == 20 && el < Duration::from_secs(1800),
        detail: format!(
            "{ok}/20 within (1+eps) of planted cost, bracket coverage {covered}/20 [ratios {}]; {:.1}s",
            ratios.join(" "),
            el.as_secs_f64()
        ),
    }
}

// 9 -------------------------------------------------------------------------

fn c9_formulas() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mismatches = 0;
    for _ in 0..20 {
        let beta = rng.gen_range(1.0..40.0);
        let ell = rng.gen_range(1..=5usize);
        let eps = rng.gen_range(0.05..0.95);
        let mu = rng.gen_range(0.05..0.95);
        let x = rng.gen_range(1..=50usize);
        let cost = rng.gen_range(0.01..10.0);
        let y = ((80.0 * beta * ell as f64 / eps) * (80.0 * ell as f64 / mu).ln()).ceil() as usize;
        let u = 10.0 * ell as f64 / (eps * eps) * cost;
        let l = eps * mu / (34.0 * x as f64) * cost;
        let steps = (u / l).ceil() as u64;
        let (gu, gl) = threshold_bounds(ell, eps, mu, x, cost);
        if sample_size(beta, ell, eps, mu) != y || gu.to_bits() != u.to_bits() || gl.to_bits() != l.to_bits() || threshold_steps(gu, gl) != steps {
            mismatches += 1;
        }
    }
    // full threshold grid on a tiny input: every searched vector is b L with
    // integer b in [1, ceil(U / L)], and all of them are searched
    let t = vec![curve(&[[0.0, 0.0], [1.0, 0.0]]), curve(&[[0.0, 0.1], [1.0, 0.05]])];
    let params = FinderParams {
        ell: 1,
        beta: 1.0,
        mu: 0.9,
        eps: 0.9,
        seed: 9,
        overrides: FinderOverrides {
            sample_size: Some(2),
            subset_size: Some(1),
            ..FinderOverrides::default()
        },
    };
    let set = candidate_finder(&t, &params).unwrap();
    let expected: u64 = set
        .subsets
        .iter()
        .map(|s| if s.lower > 0.0 { threshold_steps(s.upper, s.lower) } else { 0 })
        .sum();
    let mut grid_bad = 0;
    for p in &set.provenance {
        if let CandidateSource::TwoPhase { deltas, .. } = &p.source {
            let s = &set.subsets[p.subset];
            for &d in deltas {
                let b = (d / s.lower).round();
                if (b * s.lower).to_bits() != d.to_bits() || b < 1.0 || b as u64 > threshold_steps(s.upper, s.lower) {
                    grid_bad += 1;
                }
            }
        }
    }
    Verdict {
        pass: mismatches == 0 && grid_bad == 0 && set.searches == expected,
        detail: format!(
            "{mismatches}/20 formula mismatches; grid: {} searches (expected {expected}), {grid_bad} off-grid thresholds",
            set.searches
        ),
    }
}

// 10 ------------------------------------------------------------------------

fn run_cli(args: &[&str]) -> (Vec<u8>, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_frechet-kit")).args(args).output().expect("run cli");
    (out.stdout, out.status.code().unwrap_or(-1))
}

fn write_fixture(dir: &Path, name: &str, curves: &[PolygonalCurve]) -> PathBuf {
    let path = dir.join(name);
    let f = frechet_kit_cli::io::curves_to_json(curves);
    std::fs::write(&path, serde_json::to_string(&f).unwrap()).unwrap();
    path
}

fn c10_determinism() -> Verdict {
    let dir = std::env::temp_dir().join(format!("frechet-kit-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let planted = plant_clusters(2, 4, 4, 2, 0.5, 0.05, 3).unwrap();
    let pair = write_fixture(&dir, "pair.json", &planted.curves[..2]);
    let one = write_fixture(&dir, "one.json", &planted.curves[..1]);
    let other = write_fixture(&dir, "other.json", &planted.curves[1..2]);
    let all = write_fixture(&dir, "all.json", &planted.curves);
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let svg = |tag: &str, run: usize| s(&dir.join(format!("{tag}-{run}.svg")));
    let jobs: Vec<(&str, Box<dyn Fn(usize) -> Vec<String>>)> = vec![
        ("dist", Box::new(|_| vec!["dist".into(), s(&one), s(&other)])),
        (
            "simplify",
            Box::new(|r| vec!["simplify".into(), s(&one), "--delta".into(), "0.05".into(), "--svg".into(), svg("simplify", r)]),
        ),
        (
            "repr",
            Box::new(|r| {
                vec!["repr".into(), s(&pair), "--ell".into(), "2".into(), "--thresholds".into(), "0.08".into(), "--svg".into(), svg("repr", r)]
            }),
        ),
        (
            "cluster",
            Box::new(|r| {
                [
                    "cluster", &s(&all), "--k", "2", "--ell", "2", "--seed", "7", "--sample-size", "6", "--subset-size", "2",
                    "--threshold-factors", "1.0", "--svg", &svg("cluster", r),
                ]
                .iter()
                .map(|x| x.to_string())
                .collect()
            }),
        ),
    ];
    let mut same = 0;
    let mut notes = Vec::new();
    for (tag, args) in &jobs {
        let a: Vec<String> = args(0);
        let b: Vec<String> = args(1);
        let (ja, ca) = run_cli(&a.iter().map(String::as_str).collect::<Vec<_>>());
        let (jb, cb) = run_cli(&b.iter().map(String::as_str).collect::<Vec<_>>());
        let svg_same = if *tag == "dist" {
            true
        } else {
            let (x, y) = (std::fs::read(svg(tag, 0)), std::fs::read(svg(tag, 1)));
            matches!((x, y), (Ok(x), Ok(y)) if x == y)
        };
        if ja == jb && ca == cb && ca == 0 && svg_same {
            same += 1;
        } else {
            notes.push(format!("{tag}: exit {ca}/{cb}"));
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Verdict {
        pass: same == jobs.len(),
        detail: format!("{same}/{} subcommands byte-identical in JSON and SVG {}", jobs.len(), notes.join(" ")),
    }
}

fn main() {
    let criteria: Vec<(&str, &str, fn() -> Verdict)> = vec![
        ("1", "frechet distance vs densified discrete", c1_frechet),
        ("2", "F(R,S) membership vs sampling oracle", c2_decomposition),
        ("3", "planted instances, full mode", || solve_planted(SolveMode::Full)),
        ("4", "infeasible instances are null", c4_null),
        ("5", "forward/backward fuzz", c5_fuzz),
        ("6", "bicriteria simplification", c6_bicriteria),
        ("7", "planted instances, subset mode", || solve_planted(SolveMode::Subset5l)),
        ("8", "planted clustering", c8_clustering),
        ("9", "formula fidelity", c9_formulas),
        ("10", "determinism", c10_determinism),
    ];
    // positional arguments pick criteria by number; libtest flags are ignored
    let wanted: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, f) in criteria {
        if !wanted.is_empty() && !wanted.iter().any(|w| w == id) {
            continue;
        }
        let v = f();
        println!("[{}] {id:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

use frechet_kit::discretize::{build_g1, build_g2, build_l, grid_cells_of_ball, GridCell};
use frechet_kit::geom::{convex_hull, dist_point_box, Point};
use frechet_kit::PolygonalCurve;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn p(x: f64, y: f64) -> Point {
    Point::new(&[x, y])
}

// Scan an index box much larger than needed.
fn brute_cells(center: &Point, r: f64, side: f64) -> Vec<Vec<i64>> {
    let reach = (r / side).ceil() as i64 + 4;
    let (bx, by) = ((center[0] / side).floor() as i64, (center[1] / side).floor() as i64);
    let mut out = Vec::new();
    for i in bx - reach..=bx + reach {
        for j in by - reach..=by + reach {
            let lo = [i as f64 * side, j as f64 * side];
            let hi = [(i + 1) as f64 * side, (j + 1) as f64 * side];
            if dist_point_box(center, &lo, &hi) <= r + 1e-12 * (1.0 + r) {
                out.push(vec![i, j]);
            }
        }
    }
    out.sort();
    out
}

fn indices(cells: &[GridCell]) -> Vec<Vec<i64>> {
    let mut v: Vec<Vec<i64>> = cells.iter().map(|c| c.index.to_vec()).collect();
    v.sort();
    v
}

#[test]
fn ball_cells_match_index_box_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let c = p(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let r = rng.gen_range(0.0..2.0);
        let side = rng.gen_range(0.1..1.0);
        assert_eq!(indices(&grid_cells_of_ball(&c, r, side)), brute_cells(&c, r, side));
    }
}

#[test]
fn g1_single_vertex() {
    let tau = PolygonalCurve::from_coords(&[vec![0.3, -0.2]]).unwrap();
    let g1 = build_g1(&[tau.clone()], &[1.0], 0.5, 1);
    assert_eq!(g1.len(), 1);
    assert_eq!(g1[0].side, 0.5);
    assert_eq!(indices(&g1[0].cells), brute_cells(tau.first(), 1.0 + SQRT2 * 0.5, 0.5));
    let c = &g1[0].cells[0];
    assert_eq!(c.provenance.map(|p| (p.curve, p.vertex)), Some((0, 0)));
}

#[test]
fn g1_count_scales_with_l_squared() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let rows: Vec<Vec<f64>> = (0..4).map(|_| vec![rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0)]).collect();
        let tau = PolygonalCurve::from_coords(&rows).unwrap();
        let n1 = build_g1(&[tau.clone()], &[0.3], 0.5, 1)[0].len() as f64;
        let n2 = build_g1(&[tau], &[0.3], 0.5, 2)[0].len() as f64;
        assert!((2.0..=8.0).contains(&(n2 / n1)), "{n1} {n2}");
    }
}

#[test]
fn g1_covers_the_vertex_balls() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let curves: Vec<PolygonalCurve> = (0..2)
        .map(|_| {
            let rows: Vec<Vec<f64>> = (0..3).map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
            PolygonalCurve::from_coords(&rows).unwrap()
        })
        .collect();
    let deltas = [0.1, 0.15];
    let (eps, l) = (0.5, 2);
    let g1 = build_g1(&curves, &deltas, eps, l);
    for (i, c) in curves.iter().enumerate() {
        let r = deltas[i] + SQRT2 * eps * deltas[i];
        let side = g1[i].side;
        for v in c.vertices() {
            assert!(g1[i].contains_index(&GridCell::containing(v, side).index));
            for _ in 0..200 {
                let (t, rho) = (rng.gen_range(0.0..std::f64::consts::TAU), r * rng.gen_range(0.0f64..1.0).sqrt());
                let q = p(v[0] + rho * t.cos(), v[1] + rho * t.sin());
                assert!(g1[i].contains_index(&GridCell::containing(&q, side).index));
            }
        }
    }
    // identical inputs give identical sets
    let again = build_g1(&curves, &deltas, eps, l);
    for (x, y) in g1.iter().zip(&again) {
        assert_eq!(indices(&x.cells), indices(&y.cells));
    }
}

#[test]
fn g2_of_the_origin() {
    let tau = PolygonalCurve::from_coords(&[vec![0.0, 0.0]]).unwrap();
    let g2 = build_g2(&[tau.clone()], &[1.0], 1.0);
    assert_eq!(g2.side, 1.0);
    assert_eq!(indices(&g2.cells), brute_cells(tau.first(), 9.0 * SQRT2, 1.0));
}

#[test]
fn g2_holds_every_vertex() {
    let a = PolygonalCurve::from_coords(&[vec![0.1, 0.2], vec![0.9, 0.4]]).unwrap();
    let b = PolygonalCurve::from_coords(&[vec![-0.5, 0.0], vec![0.3, 1.7], vec![2.0, 2.0]]).unwrap();
    let g2 = build_g2(&[a.clone(), b.clone()], &[0.05, 0.1], 0.5);
    for v in a.vertices().iter().chain(b.vertices()) {
        assert!(g2.contains_index(&GridCell::containing(v, g2.side).index));
    }
}

fn covering_case(tau: &PolygonalCurve, dmin: f64, eps: f64, seed: u64) {
    let fam = build_l(tau, dmin, eps).unwrap();
    let side = eps * dmin;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (a, group) in fam.groups.iter().enumerate() {
        let (va, vb) = (tau.vertex(a), tau.vertex(a + 1));
        let first = grid_cells_of_ball(va, dmin, side);
        let mut corners = Vec::new();
        for c in first.iter().chain(&grid_cells_of_ball(vb, dmin, side)) {
            corners.extend(c.vertices());
        }
        let mut grid_vertices: Vec<Vec<i64>> = Vec::new();
        for c in &first {
            for v in c.vertices() {
                grid_vertices.push(v.coords().iter().map(|x| (x / side).round() as i64).collect());
            }
        }
        grid_vertices.sort();
        grid_vertices.dedup();
        assert!(group.len() <= grid_vertices.len());

        let dir = vb - va;
        for s in group {
            let u = s.direction();
            let cross = u[0] * dir[1] - u[1] * dir[0];
            // near-tangent clips are tiny; bound their lateral drift instead of the angle
            assert!(cross.abs() <= 1e-12 * u.norm().max(1e-3) * dir.norm(), "len {} cross {}", u.norm(), cross / dir.norm());
        }

        let hull = convex_hull(&corners).unwrap();
        let (lo, hi) = (
            [corners.iter().map(|c| c[0]).fold(f64::INFINITY, f64::min), corners.iter().map(|c| c[1]).fold(f64::INFINITY, f64::min)],
            [corners.iter().map(|c| c[0]).fold(f64::NEG_INFINITY, f64::max), corners.iter().map(|c| c[1]).fold(f64::NEG_INFINITY, f64::max)],
        );
        let bound = SQRT2 * eps * dmin + 1e-9;
        let mut sampled = 0;
        while sampled < 1000 {
            let q = p(rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1]));
            if !hull.contains(&q) {
                continue;
            }
            sampled += 1;
            let near = group.iter().map(|s| s.dist_to_point(&q)).fold(f64::INFINITY, f64::min);
            assert!(near <= bound, "edge {a}: {q:?} at {near}");
        }
    }
}

#[test]
fn segment_family_covers_hulls() {
    let tau = PolygonalCurve::from_coords(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
    let fam = build_l(&tau, 1.0, 0.5).unwrap();
    assert!(fam.iter().all(|s| (s.a[1] - s.b[1]).abs() <= 1e-12));
    covering_case(&tau, 1.0, 0.5, 0);
    let tau = PolygonalCurve::from_coords(&[vec![0.0, 0.0], vec![0.31, 0.17], vec![0.2, 0.6]]).unwrap();
    covering_case(&tau, 0.1, 0.5, 1);
    covering_case(&tau, 0.07, 0.25, 2);
}

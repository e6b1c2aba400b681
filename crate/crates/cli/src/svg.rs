//! Static SVG plots of curves projected onto their first two coordinates.

use std::fmt::Write as _;
use std::path::Path;

use frechet_kit::PolygonalCurve;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 20.0;

/// An axis-aligned box drawn behind the curves.
pub struct CellBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

fn xy(c: &[f64]) -> (f64, f64) {
    (c[0], c.get(1).copied().unwrap_or(0.0))
}

/// Renders inputs in grey, results in red and cells in light blue.
pub fn render_svg(curves: &[PolygonalCurve], result: &[PolygonalCurve], cells: &[CellBox]) -> String {
    let mut lo = (f64::INFINITY, f64::INFINITY);
    let mut hi = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut grow = |p: (f64, f64)| {
        lo = (lo.0.min(p.0), lo.1.min(p.1));
        hi = (hi.0.max(p.0), hi.1.max(p.1));
    };
    for c in curves.iter().chain(result) {
        for v in c.vertices() {
            grow(xy(v.coords()));
        }
    }
    for b in cells {
        grow(xy(&b.lo));
        grow(xy(&b.hi));
    }
    if !lo.0.is_finite() {
        lo = (0.0, 0.0);
        hi = (1.0, 1.0);
    }
    let span = (hi.0 - lo.0).max(hi.1 - lo.1).max(1e-12);
    let s = (SIZE - 2.0 * MARGIN) / span;
    // y axis points up
    let map = |p: (f64, f64)| (MARGIN + (p.0 - lo.0) * s, SIZE - MARGIN - (p.1 - lo.1) * s);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for b in cells {
        let (x0, y0) = map(xy(&b.lo));
        let (x1, y1) = map(xy(&b.hi));
        let _ = writeln!(
            out,
            r##"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="#add8e6" fill-opacity="0.5" stroke="#6fa8c8" stroke-width="0.5"/>"##,
            x0.min(x1),
            y0.min(y1),
            (x1 - x0).abs(),
            (y1 - y0).abs()
        );
    }
    let mut path = |c: &PolygonalCurve, color: &str, width: f64| {
        let pts: Vec<String> = c
            .vertices()
            .iter()
            .map(|v| {
                let (x, y) = map(xy(v.coords()));
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="{width}" stroke-linejoin="round"/>"#,
            pts.join(" ")
        );
        for p in &pts {
            let (x, y) = p.split_once(',').unwrap();
            let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="{:.1}" fill="{color}"/>"#, width * 1.2);
        }
    };
    for c in curves {
        path(c, "grey", 1.0);
    }
    for c in result {
        path(c, "red", 2.0);
    }
    out.push_str("</svg>\n");
    out
}

pub fn emit_svg(curves: &[PolygonalCurve], result: &[PolygonalCurve], cells: &[CellBox], path: &Path) -> std::io::Result<()> {
    std::fs::write(path, render_svg(curves, result, cells))
}

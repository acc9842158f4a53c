//! Deterministic SVG rendering of planar complexes and line fields.

use std::collections::BTreeSet;
use std::fmt::Write;

use nalgebra::DVector;

use crate::error::{JiggleError, Result};
use crate::pl_maps::PLMap;
use crate::simplicial::Simplex;
use crate::transversality::{Distribution, TransversalityReport};

pub const CANVAS: f64 = 800.0;
const PAD: f64 = 40.0;
const GLYPH_GRID: usize = 12;

struct View {
    lo: [f64; 2],
    scale: f64,
}

impl View {
    fn px(&self, p: &DVector<f64>) -> (f64, f64) {
        (PAD + (p[0] - self.lo[0]) * self.scale, CANVAS - PAD - (p[1] - self.lo[1]) * self.scale)
    }
}

fn num(x: f64) -> String {
    // Avoid "-0.000000" so equal drawings hash equally.
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

/// Draws the image simplices of `map`, failing simplices of `report` in red
/// and, when given, the line field `ξ` as short glyphs on a grid.
pub fn render_svg(map: &PLMap, xi: Option<&dyn Distribution>, report: Option<&TransversalityReport>) -> Result<String> {
    if map.target_dim() != 2 {
        return Err(JiggleError::UnsupportedDimension(map.target_dim()));
    }
    if let Some(x) = xi {
        if x.ambient_dim() != 2 {
            return Err(JiggleError::UnsupportedDimension(x.ambient_dim()));
        }
    }
    let failing: BTreeSet<Simplex> = report.map(|r| r.failing().map(|s| s.simplex.clone()).collect()).unwrap_or_default();
    let mut out = String::new();
    let c = num(CANVAS);
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{c}" height="{c}" viewBox="0 0 {c} {c}">"#).unwrap();
    let images = map.images();
    if images.is_empty() {
        out.push_str("</svg>\n");
        return Ok(out);
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in images {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let scale = if span > 0.0 { (CANVAS - 2.0 * PAD) / span } else { 1.0 };
    let view = View { lo, scale };
    let k = map.domain();

    out.push_str("<g id=\"simplices\">\n");
    for s in k.maximal().iter().filter(|s| s.len() == 3) {
        let pts: Vec<String> = s
            .iter()
            .map(|&v| {
                let (x, y) = view.px(map.image(v));
                format!("{},{}", num(x), num(y))
            })
            .collect();
        let fill = if failing.contains(s) { "#f4a3a3" } else { "#dde8f5" };
        writeln!(out, r#"<polygon points="{}" fill="{fill}" stroke="none"/>"#, pts.join(" ")).unwrap();
    }
    out.push_str("</g>\n<g id=\"edges\">\n");
    for e in k.simplices(1) {
        let (x1, y1) = view.px(map.image(e[0]));
        let (x2, y2) = view.px(map.image(e[1]));
        let (stroke, w) = if failing.contains(e) { ("#d62728", "2.5") } else { ("#1f3b5c", "1") };
        writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{w}"/>"#,
            num(x1),
            num(y1),
            num(x2),
            num(y2)
        )
        .unwrap();
    }
    out.push_str("</g>\n");
    for v in k.simplices(0).iter().filter(|v| failing.contains(*v)) {
        let (x, y) = view.px(map.image(v[0]));
        writeln!(out, r##"<circle cx="{}" cy="{}" r="3" fill="#d62728"/>"##, num(x), num(y)).unwrap();
    }
    if let Some(xi) = xi.filter(|x| x.rank() == 1) {
        out.push_str("<g id=\"distribution\">\n");
        let cell = if span > 0.0 { span / GLYPH_GRID as f64 } else { 1.0 };
        let half = 0.3 * cell;
        for j in 0..=GLYPH_GRID {
            for i in 0..=GLYPH_GRID {
                let p = DVector::from_column_slice(&[lo[0] + i as f64 * cell, lo[1] + j as f64 * cell]);
                let b = xi.eval(&p).basis().column(0).clone_owned();
                let (x1, y1) = view.px(&(&p - &b * half));
                let (x2, y2) = view.px(&(&p + &b * half));
                writeln!(
                    out,
                    r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#7f7f7f" stroke-width="1"/>"##,
                    num(x1),
                    num(y1),
                    num(x2),
                    num(y2)
                )
                .unwrap();
            }
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

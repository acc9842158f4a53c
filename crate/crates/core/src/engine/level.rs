use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{JiggleError, Result};
use crate::grassmannian::d_proj;
use crate::pl_maps::{barycentric_lattice, distances, linearize, DomainMap, Locus};
use crate::simplicial::shape_of_points;
use crate::transversality::Distribution;

const PROBE_DEPTH: usize = 4;

/// Largest `d_proj(ξ_c, ξ_{c+u})` over the centers and probe offsets `u` of
/// length `r` along the axes and the diagonals of coordinate planes.
pub fn ball_oscillation(xi: &dyn Distribution, centers: &[DVector<f64>], r: f64) -> f64 {
    if r <= 0.0 || centers.is_empty() {
        return 0.0;
    }
    let n = centers[0].len();
    let mut offsets = Vec::new();
    for i in 0..n {
        let mut e = DVector::zeros(n);
        e[i] = r;
        offsets.push(e.clone());
        offsets.push(-e);
        for j in i + 1..n {
            for s in [1.0, -1.0] {
                let mut d = DVector::zeros(n);
                d[i] = r / 2f64.sqrt();
                d[j] = s * r / 2f64.sqrt();
                offsets.push(d.clone());
                offsets.push(-d);
            }
        }
    }
    centers
        .par_iter()
        .map(|c| {
            let base = xi.eval(c);
            offsets.iter().map(|u| d_proj(&base, &xi.eval(&(c + u))).unwrap_or(1.0)).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// Image points of `f` on a lattice of each maximal simplex, and the largest
/// image edge length over the maximal simplices.
fn image_samples(f: &dyn DomainMap) -> (Vec<DVector<f64>>, f64) {
    let k = f.domain();
    let mut pts = Vec::new();
    let mut rmax = 0.0f64;
    for s in k.maximal() {
        let m = s.len() - 1;
        let dom = k.points(s);
        let mut corners = Vec::with_capacity(s.len());
        for mu in barycentric_lattice(m, PROBE_DEPTH) {
            let mut x = DVector::zeros(k.ambient_dim());
            for (p, &w) in dom.iter().zip(&mu) {
                x.axpy(w, p, 1.0);
            }
            let y = f.value(&Locus { x: &x, simplex: s, bary: &mu, scale: 0.0 });
            if mu.contains(&1.0) {
                corners.push(y.clone());
            }
            pts.push(y);
        }
        if corners.len() > 1 {
            rmax = rmax.max(shape_of_points(&corners.iter().collect::<Vec<_>>()).rmax);
        }
    }
    (pts, rmax)
}

/// Smallest level `ℓ ≤ max_level` at which the oscillation of `ξ` over balls
/// of radius `R·2^-ℓ` is below `margin_floor / (4R)`, `R` being the largest
/// image edge of `f` on `K`, and at which the linearization spends at most
/// half of both the C¹ budget `gamma` and the C⁰ budget `gamma·2^-ℓ`.
pub fn auto_level(f: &dyn DomainMap, xi: &dyn Distribution, gamma: f64, margin_floor: f64, max_level: u32) -> Result<u32> {
    let (centers, r0) = image_samples(f);
    if r0 == 0.0 {
        return Ok(0);
    }
    let threshold = margin_floor / (4.0 * r0);
    for level in 0..=max_level {
        let scale = 0.5f64.powi(level as i32);
        if ball_oscillation(xi, &centers, r0 * scale) >= threshold {
            continue;
        }
        let (lin, sub) = linearize(f, level);
        let d = distances(f, &lin, Some(&sub))?;
        if d.c1 <= 0.5 * gamma && d.c0 <= 0.5 * gamma * scale {
            return Ok(level);
        }
    }
    Err(JiggleError::LevelExhausted(max_level))
}

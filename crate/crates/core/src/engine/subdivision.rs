use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::config::JigglingConfig;
use super::euclidean::{final_report, report_failure, resolve_level, vertex_budget, JigglingOutcome};
use super::induction::{self, Induction};
use crate::error::{JiggleError, Result};
use crate::grassmannian::AffineFlat;
use crate::linalg::{columns, dist_to_affine_span, pinv, simplex_volume};
use crate::pl_maps::{distances, PLMap};
use crate::simplicial::{barycentric_subdivide, crystalline_subdivide, shape_of_points, SimplicialComplex, SubdivisionMap};
use crate::transversality::{stratified_transverse, Distribution};

/// Tolerance for a perturbed vertex staying in its carrier face of `K`.
pub const CARRIER_TOL: f64 = 1e-12;

fn combine(pts: &[&DVector<f64>], w: &[f64]) -> DVector<f64> {
    let mut x = DVector::zeros(pts[0].len());
    for (p, &c) in pts.iter().zip(w) {
        x.axpy(c, p, 1.0);
    }
    x
}

/// Barycentric coordinates of `y` with respect to affinely independent points.
fn barycentric_of(y: &DVector<f64>, pts: &[&DVector<f64>]) -> Vec<f64> {
    if pts.len() == 1 {
        return vec![1.0];
    }
    let e = columns(&pts[1..].iter().map(|p| *p - pts[0]).collect::<Vec<_>>(), y.len());
    let t = pinv(&e) * (y - pts[0]);
    let mut w = vec![1.0 - t.sum()];
    w.extend(t.iter().copied());
    w
}

fn orientation(pts: &[&DVector<f64>]) -> f64 {
    let n = pts[0].len();
    let e = DMatrix::from_columns(&pts[1..].iter().map(|p| *p - pts[0]).collect::<Vec<_>>());
    if e.ncols() == n {
        e.determinant().signum()
    } else {
        1.0
    }
}

/// Checks that `T` maps every child simplex non-degenerately and with its
/// original orientation, and that the images over each top simplex of `K`
/// fill exactly its volume.
fn check_tiling(k: &SimplicialComplex, t: &PLMap, total: &SubdivisionMap, rtol: f64) -> Result<()> {
    let kc = t.domain();
    let mut sums: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for s in kc.maximal().iter().filter(|s| s.len() > 1) {
        let img = t.image_points(s);
        if shape_of_points(&img).is_degenerate() || orientation(&img) != orientation(&kc.points(s)) {
            return Err(JiggleError::VolumeMismatch { image: 0.0, domain: simplex_volume(&kc.points(s)) });
        }
        *sums.entry(total.carrier(s)).or_insert(0.0) += simplex_volume(&img);
    }
    for p in k.maximal().iter().filter(|p| p.len() > 1) {
        let want = simplex_volume(&k.points(p));
        let got = sums.get(p).copied().unwrap_or(0.0);
        if (got - want).abs() > rtol * want {
            return Err(JiggleError::VolumeMismatch { image: got, domain: want });
        }
    }
    Ok(())
}

/// Jiggles a subdivision `K′` of `K` inside `|K|`: `K′` is subdivided
/// barycentrically, then crystalline, and each new vertex moves within its
/// carrier face of `K` (lower-dimensional carriers first) until `(f∘T, K″)`
/// is in general position. `f` is affine on the simplices of `K`.
pub fn jiggle_subdivision(
    f: &PLMap,
    refined: &SimplicialComplex,
    refinement: &SubdivisionMap,
    xi: &dyn Distribution,
    cfg: &JigglingConfig,
) -> Result<JigglingOutcome> {
    cfg.validate()?;
    let k = f.domain();
    if refinement.parent_vertices != k.num_vertices() || refinement.child_vertices() != refined.num_vertices() {
        return Err(JiggleError::DomainMismatch);
    }
    if f.target_dim() != xi.ambient_dim() {
        return Err(JiggleError::AmbientMismatch(f.target_dim(), xi.ambient_dim()));
    }
    for s in k.maximal().iter().filter(|s| s.len() > 1) {
        let img = f.image_points(s);
        let c = combine(&img, &vec![1.0 / s.len() as f64; s.len()]);
        if !stratified_transverse(&img, &xi.eval(&c), cfg.tolerances.rank).unwrap_or(false) {
            return Err(JiggleError::PreconditionViolated(format!("simplex {s:?} of K is not stratified transverse")));
        }
    }
    let level = resolve_level(f, xi, cfg)?;
    let (kb, sb) = barycentric_subdivide(refined);
    let (kc, sc) = crystalline_subdivide(&kb, level);
    let total = refinement.compose(&sb).compose(&sc);
    let nv = kc.num_vertices();

    let anchors: Vec<DVector<f64>> = (0..nv)
        .map(|v| {
            let (ids, ws): (Vec<usize>, Vec<f64>) = total.weights[v].iter().copied().unzip();
            combine(&f.image_points(&ids), &ws)
        })
        .collect();
    let carriers: Vec<Vec<usize>> = (0..nv).map(|v| total.vertex_carrier(v)).collect();
    let mut order: Vec<usize> = (0..nv).collect();
    order.sort_by_key(|&v| (carriers[v].len(), v));
    let fixed: Vec<bool> = carriers.iter().map(|c| c.len() == 1).collect();
    let constraints: Vec<Option<AffineFlat>> = carriers
        .iter()
        .map(|c| if c.len() > 1 && c.len() <= f.target_dim() { Some(AffineFlat::through(&f.image_points(c))) } else { None })
        .collect();

    let lin = PLMap::new(kc.clone(), f.target_dim(), anchors.clone())?;
    let lin_err = distances(f, &lin, Some(&total))?;
    let eps = vertex_budget(&lin, &lin_err, cfg.gamma, level, cfg.epsilon_vertex)?;
    let ind = Induction {
        complex: &kc,
        anchors: &anchors,
        order,
        fixed,
        excluded: vec![false; nv],
        constraints,
        epsilon: eps,
        level,
    };
    let res = induction::run(&ind, xi, cfg)?;

    let mut positions = Vec::with_capacity(nv);
    let mut images = Vec::with_capacity(nv);
    for v in 0..nv {
        let c = &carriers[v];
        let cdom = k.points(c);
        if res.images[v] == anchors[v] {
            positions.push(kc.vertex(v).clone());
            images.push(anchors[v].clone());
            continue;
        }
        let w = barycentric_of(&res.images[v], &f.image_points(c));
        let x = combine(&cdom, &w);
        if w.iter().any(|&l| l < -CARRIER_TOL) || dist_to_affine_span(&x, &cdom) > CARRIER_TOL {
            return Err(JiggleError::SkeletonViolation(v));
        }
        images.push(combine(&f.image_points(c), &w));
        positions.push(x);
    }
    let t = PLMap::new(kc.clone(), k.ambient_dim(), positions)?;
    check_tiling(k, &t, &total, 1e-9)?;
    let g = PLMap::new(kc, f.target_dim(), images)?;
    let report = final_report(&g, xi, cfg, &anchors, &res.rank, None)?;
    if !report.pass {
        return Err(report_failure(&report, &res.rank));
    }
    let d = distances(f, &g, Some(&total))?;
    Ok(JigglingOutcome {
        mode: "subdivision".into(),
        level,
        g,
        subdivision: total,
        report,
        distances: d,
        epsilon_vertex: eps,
        moves: res.moves,
        transform: Some(t),
    })
}

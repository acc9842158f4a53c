use nalgebra::DVector;

use super::config::JigglingConfig;
use super::euclidean::{check_budget, final_report, report_failure, resolve_level, vertex_budget, JigglingOutcome};
use super::induction::{self, Induction};
use crate::error::{JiggleError, Result};
use crate::pl_maps::{distances, is_piecewise_embedding, linearize, DomainMap, PLMap};
use crate::simplicial::{Subcomplex, SubdivisionMap};
use crate::transversality::{stratified_transverse, Distribution};

/// `A` stays fixed and must come out in general position together with its
/// star; `B` stays fixed inside the neighborhood of radius `radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeRegion {
    pub a: Subcomplex,
    pub b: Subcomplex,
    pub radius: f64,
}

struct Marks {
    in_a: Vec<bool>,
    in_b: Vec<bool>,
}

fn marks(sub: &SubdivisionMap, region: &RelativeRegion) -> Marks {
    let n = sub.child_vertices();
    Marks {
        in_a: (0..n).map(|v| region.a.contains(&sub.vertex_carrier(v))).collect(),
        in_b: (0..n).map(|v| region.b.contains(&sub.vertex_carrier(v))).collect(),
    }
}

/// Largest edge among the simplices of `K_ℓ` touching `B`; these simplices
/// lie within that distance of `|B|`.
fn collar_reach(lin: &PLMap, in_b: &[bool]) -> f64 {
    let k = lin.domain();
    k.maximal()
        .iter()
        .filter(|s| s.iter().any(|&v| in_b[v]))
        .map(|s| k.shape(s).rmax)
        .fold(0.0, f64::max)
}

fn linearize_with_collar(f: &dyn DomainMap, region: &RelativeRegion, level: u32) -> Result<(PLMap, SubdivisionMap, Marks)> {
    let (lin, sub) = linearize(f, level);
    let m = marks(&sub, region);
    let reach = collar_reach(&lin, &m.in_b);
    if reach >= region.radius && m.in_b.iter().any(|&b| b) {
        return Err(JiggleError::CollarTooSmall(format!(
            "simplices touching B reach {reach} at level {level}, neighborhood radius is {}",
            region.radius
        )));
    }
    Ok((lin, sub, m))
}

/// Jiggling relative to `A ∪ B`: vertices carried by `A` or `B` keep their
/// images bitwise, the others are moved. General position is certified on
/// every simplex of `K_ℓ` without a vertex carried by `B` alone, which
/// covers `str(A)` and everything outside the neighborhood of `|B|`.
pub fn jiggle_relative(f: &dyn DomainMap, xi: &dyn Distribution, cfg: &JigglingConfig, region: &RelativeRegion) -> Result<JigglingOutcome> {
    cfg.validate()?;
    let k = f.domain();
    for s in region.a.iter().chain(region.b.iter()) {
        if !k.contains(s) {
            return Err(JiggleError::QueryNotInComplex);
        }
    }
    if f.target_dim() != xi.ambient_dim() {
        return Err(JiggleError::AmbientMismatch(f.target_dim(), xi.ambient_dim()));
    }
    let (level, (lin, sub, m)) = match cfg.level {
        Some(l) => (l, linearize_with_collar(f, region, l)?),
        None => {
            let mut l = resolve_level(f, xi, cfg)?;
            loop {
                match linearize_with_collar(f, region, l) {
                    Ok(r) => break (l, r),
                    Err(JiggleError::CollarTooSmall(_)) if l < cfg.max_level => l += 1,
                    Err(e) => return Err(e),
                }
            }
        }
    };
    if !is_piecewise_embedding(&lin, cfg.tolerances.degeneracy) {
        return Err(JiggleError::PreconditionViolated("linearized map is not a piecewise embedding".into()));
    }
    let kl = lin.domain();
    let nv = kl.num_vertices();
    let fixed: Vec<bool> = (0..nv).map(|v| m.in_a[v] || m.in_b[v]).collect();
    let b_only: Vec<bool> = (0..nv).map(|v| m.in_b[v] && !m.in_a[v]).collect();

    for s in kl.maximal() {
        let a_face: Vec<usize> = s.iter().copied().filter(|&v| m.in_a[v]).collect();
        if a_face.len() > 1 {
            let img = lin.image_points(&a_face);
            let c = img.iter().fold(DVector::zeros(lin.target_dim()), |acc, p| acc + *p) / img.len() as f64;
            if !stratified_transverse(&img, &xi.eval(&c), cfg.tolerances.rank).unwrap_or(false) {
                return Err(JiggleError::PreconditionViolated(format!("face {a_face:?} of A is not stratified transverse")));
            }
        }
    }

    let lin_err = distances(f, &lin, Some(&sub))?;
    let eps = vertex_budget(&lin, &lin_err, cfg.gamma, level, cfg.epsilon_vertex)?;
    let mut order: Vec<usize> = (0..nv).filter(|&v| fixed[v]).collect();
    order.extend((0..nv).filter(|&v| !fixed[v]));
    let ind = Induction {
        complex: kl,
        anchors: lin.images(),
        order,
        fixed: fixed.clone(),
        excluded: b_only.clone(),
        constraints: vec![None; nv],
        epsilon: eps,
        level,
    };
    let res = induction::run(&ind, xi, cfg)?;
    let g = lin.with_images(res.images)?;
    if !is_piecewise_embedding(&g, cfg.tolerances.degeneracy) {
        return Err(JiggleError::EmbeddingLost);
    }
    let required: Vec<bool> = kl.maximal().iter().map(|s| !s.iter().any(|&v| b_only[v])).collect();
    let report = final_report(&g, xi, cfg, lin.images(), &res.rank, Some(required))?;
    if !report.pass {
        return Err(report_failure(&report, &res.rank));
    }
    let d = distances(f, &g, Some(&sub))?;
    check_budget(&d, cfg.gamma, level)?;
    Ok(JigglingOutcome {
        mode: "relative".into(),
        level,
        g,
        subdivision: sub,
        report,
        distances: d,
        epsilon_vertex: eps,
        moves: res.moves,
        transform: None,
    })
}

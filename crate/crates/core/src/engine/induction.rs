use std::collections::BTreeSet;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::config::JigglingConfig;
use crate::error::{JiggleError, Result};
use crate::grassmannian::{d_proj, is_transverse_planes, AffineFlat, Plane};
use crate::pl_maps::barycentric_lattice;
use crate::perturbation::{perturb_vertex, PerturbationRequest, SearchParams};
use crate::simplicial::{Simplex, SimplicialComplex};
use crate::transversality::Distribution;

/// Cap on foliations sampled per vertex. They are picked farthest-first in
/// `d_proj` from `ξ` on the barycentric lattices of the vertex star, the same
/// points the final report checks.
pub const MAX_FOLIATIONS: usize = 12;

/// A vertex keeps its position only when every margin there is at least this
/// share of its budget.
pub const INCUMBENT_SHARE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexMove {
    pub vertex: usize,
    pub displacement: f64,
    /// Radius of the certified ball; absent for fixed vertices.
    pub achieved_delta: Option<f64>,
    pub kept_incumbent: bool,
    pub fixed: bool,
}

pub(crate) struct Induction<'a> {
    pub complex: &'a SimplicialComplex,
    /// Unperturbed images; `ξ` is frozen at these points.
    pub anchors: &'a [DVector<f64>],
    pub order: Vec<usize>,
    pub fixed: Vec<bool>,
    /// Vertices whose simplices never enter the captured stars.
    pub excluded: Vec<bool>,
    pub constraints: Vec<Option<AffineFlat>>,
    pub epsilon: f64,
    pub level: u32,
}

pub(crate) struct InductionResult {
    pub images: Vec<DVector<f64>>,
    pub moves: Vec<VertexMove>,
    /// Position of each vertex in the processing order.
    pub rank: Vec<usize>,
}

fn foliations_at(ind: &Induction, xi: &dyn Distribution, v: usize, depth: usize) -> Vec<Plane> {
    let k = ind.complex;
    let primary = xi.eval(&ind.anchors[v]);
    let mut candidates: Vec<Plane> = Vec::new();
    for &mi in k.maximal_containing(v) {
        let s = &k.maximal()[mi];
        for mu in barycentric_lattice(s.len() - 1, depth) {
            let mut x = DVector::zeros(ind.anchors[v].len());
            for (&w, &t) in s.iter().zip(&mu) {
                x.axpy(t, &ind.anchors[w], 1.0);
            }
            candidates.push(xi.eval(&x));
        }
    }
    let mut chosen = vec![primary];
    let mut gap: Vec<f64> = candidates.iter().map(|c| d_proj(&chosen[0], c).unwrap_or(0.0)).collect();
    while chosen.len() < MAX_FOLIATIONS {
        let best = gap.iter().enumerate().fold(None, |acc: Option<(usize, f64)>, (i, &d)| match acc {
            Some((_, bd)) if bd >= d => acc,
            _ => Some((i, d)),
        });
        match best {
            Some((i, d)) if d > 1e-9 => {
                let c = candidates[i].clone();
                for (g, other) in gap.iter_mut().zip(&candidates) {
                    *g = g.min(d_proj(&c, other).unwrap_or(0.0));
                }
                chosen.push(c);
            }
            _ => break,
        }
    }
    chosen
}

fn captured_star(ind: &Induction, rank: &[usize], v: usize, images: &[DVector<f64>]) -> Vec<Vec<DVector<f64>>> {
    let k = ind.complex;
    let mut faces: BTreeSet<Simplex> = BTreeSet::new();
    for &mi in k.maximal_containing(v) {
        let f: Simplex = k.maximal()[mi]
            .iter()
            .copied()
            .filter(|&w| w != v && rank[w] < rank[v] && !ind.excluded[w])
            .collect();
        if !f.is_empty() {
            faces.insert(f);
        }
    }
    let faces: Vec<&Simplex> = faces.iter().collect();
    faces
        .iter()
        .filter(|f| !faces.iter().any(|g| g.len() > f.len() && f.iter().all(|x| g.contains(x))))
        .map(|f| f.iter().map(|&w| images[w].clone()).collect())
        .collect()
}

/// The vertex induction: each free vertex in turn is moved so that its joins
/// with the already processed part of its star are semitransverse.
pub(crate) fn run(ind: &Induction, xi: &dyn Distribution, cfg: &JigglingConfig) -> Result<InductionResult> {
    let nv = ind.complex.num_vertices();
    let mut rank = vec![0; nv];
    for (i, &v) in ind.order.iter().enumerate() {
        rank[v] = i;
    }
    let mut images = ind.anchors.to_vec();
    let mut moves = Vec::with_capacity(nv);
    let floor = (cfg.tolerances.margin_floor * 0.5f64.powi(ind.level as i32)).max(INCUMBENT_SHARE * ind.epsilon);
    for &v in &ind.order {
        if ind.fixed[v] {
            moves.push(VertexMove { vertex: v, displacement: 0.0, achieved_delta: None, kept_incumbent: true, fixed: true });
            continue;
        }
        let h = ind.constraints[v].clone();
        let mut folis = foliations_at(ind, xi, v, cfg.sample_depth);
        if let Some(h) = &h {
            let primary = folis[0].clone();
            folis.retain(|p| is_transverse_planes(&h.direction, p, cfg.tolerances.rank).unwrap_or(false));
            if folis.first() != Some(&primary) {
                return Err(JiggleError::PerturbationFailed { vertex: v, reason: "carrier face is not transverse to the distribution".into() });
            }
        }
        let mut req = PerturbationRequest::new(ind.anchors[v].clone(), ind.epsilon);
        req.star_simplices = captured_star(ind, &rank, v, &images);
        req.constraint_flat = h;
        req.search = SearchParams { seed: cfg.seed ^ (v as u64).wrapping_mul(0x2545_f491_4f6c_dd1d), samples: cfg.samples };
        req.incumbent_floor = Some(floor);
        req.foliations = folis;
        let mut result = perturb_vertex(&req);
        if matches!(result, Err(JiggleError::StarNotTransverse(_))) && req.foliations.len() > 1 {
            req.foliations.truncate(1);
            result = perturb_vertex(&req);
        }
        let r = result.map_err(|e| JiggleError::PerturbationFailed { vertex: v, reason: e.to_string() })?;
        if !(r.achieved_delta > 0.0) {
            return Err(JiggleError::PerturbationFailed { vertex: v, reason: "no positive margin found".into() });
        }
        moves.push(VertexMove {
            vertex: v,
            displacement: (&r.p - &ind.anchors[v]).norm(),
            achieved_delta: Some(r.achieved_delta),
            kept_incumbent: r.kept_incumbent,
            fixed: false,
        });
        images[v] = r.p;
    }
    moves.sort_by_key(|m| m.vertex);
    Ok(InductionResult { images, moves, rank })
}

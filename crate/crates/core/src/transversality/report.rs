use std::collections::BTreeMap;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distribution::Distribution;
use super::predicates::{faces, plane_eps_margin, semitrans_margin_unchecked, simplex_plane, simplex_transverse};
use crate::error::{JiggleError, Result};
use crate::grassmannian::{is_transverse_planes, Plane};
use crate::linalg::RANK_RTOL;
use crate::pl_maps::{barycentric_lattice, PLMap};
use crate::simplicial::{shape_of_points, Simplex};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Notion {
    Transverse,
    Stratified,
    GeneralPosition,
    Report,
}

impl std::str::FromStr for Notion {
    type Err = JiggleError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "transverse" => Ok(Notion::Transverse),
            "stratified" => Ok(Notion::Stratified),
            "general-position" => Ok(Notion::GeneralPosition),
            "report" => Ok(Notion::Report),
            other => Err(JiggleError::UnknownName { kind: "notion", name: other.into() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexRecord {
    pub simplex: Simplex,
    pub dim: usize,
    /// Semitransversality margin in the last vertex; absent for vertices and
    /// for dimensions above `n − k`.
    pub semitrans_margin: Option<f64>,
    /// Smallest sampled `ε`-transversality margin; absent when unbounded.
    pub eps_margin: Option<f64>,
    pub transverse: bool,
    pub general_position: bool,
    pub degenerate: bool,
    /// Lipschitz certificate for general position, when `ξ` has a bound.
    pub certified: Option<bool>,
    pub required: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalityReport {
    pub schema_version: u32,
    pub notion: Notion,
    /// General position is checked on a barycentric lattice, not exactly.
    pub sampled: bool,
    pub sample_depth: usize,
    pub margin_floor: f64,
    pub records: Vec<SimplexRecord>,
    pub min_semitrans_margin: Option<f64>,
    pub min_eps_margin: Option<f64>,
    pub certified: Option<bool>,
    pub pass: bool,
}

impl TransversalityReport {
    pub fn record(&self, s: &[usize]) -> Option<&SimplexRecord> {
        self.records.iter().find(|r| r.simplex == s)
    }

    pub fn failing(&self) -> impl Iterator<Item = &SimplexRecord> {
        let notion = self.notion;
        self.records.iter().filter(move |r| r.required && !record_ok(r, notion))
    }
}

#[derive(Debug, Clone)]
pub struct AssessOptions {
    pub notion: Notion,
    pub depth: usize,
    pub margin_floor: f64,
    /// Per maximal simplex of the domain; `None` means all are required.
    pub required: Option<Vec<bool>>,
    /// Per domain vertex, where `ξ` is frozen for the semitransversality
    /// margins. Defaults to the vertex images.
    pub anchors: Option<Vec<DVector<f64>>>,
    /// Per domain vertex processing rank; the semitransversality margin is
    /// taken in the vertex of highest rank. Defaults to the vertex index.
    pub order: Option<Vec<usize>>,
}

impl Default for AssessOptions {
    fn default() -> Self {
        AssessOptions { notion: Notion::Report, depth: 3, margin_floor: 1e-9, required: None, anchors: None, order: None }
    }
}

fn record_ok(r: &SimplexRecord, notion: Notion) -> bool {
    if r.degenerate {
        return false;
    }
    match notion {
        Notion::Transverse | Notion::Stratified => r.transverse,
        Notion::GeneralPosition => r.general_position,
        Notion::Report => r.general_position && r.semitrans_margin.is_none_or(|d| d > 0.0),
    }
}

#[derive(Debug, Clone)]
struct Partial {
    transverse: bool,
    gp: bool,
    eps: f64,
    degenerate: bool,
    certified: Option<bool>,
    required: bool,
}

fn merge(a: &mut Partial, b: &Partial) {
    a.gp &= b.gp;
    a.eps = a.eps.min(b.eps);
    a.degenerate |= b.degenerate;
    a.required |= b.required;
    a.certified = match (a.certified, b.certified) {
        (Some(x), Some(y)) => Some(x && y),
        _ => None,
    };
}

fn barycenter(pts: &[&DVector<f64>]) -> DVector<f64> {
    let mut x = DVector::zeros(pts[0].len());
    for p in pts {
        x += *p;
    }
    x / pts.len() as f64
}

/// Checks every simplex of `(map, K)` against `ξ`.
pub fn assess(map: &PLMap, xi: &dyn Distribution, opts: &AssessOptions) -> Result<TransversalityReport> {
    let n = xi.ambient_dim();
    let k = xi.rank();
    if map.target_dim() != n {
        return Err(JiggleError::AmbientMismatch(map.target_dim(), n));
    }
    let dom = map.domain();
    let maximal = dom.maximal();
    if let Some(req) = &opts.required {
        if req.len() != maximal.len() {
            return Err(JiggleError::Malformed("required mask length differs from maximal simplex count".into()));
        }
    }
    let nv = dom.num_vertices();
    if opts.anchors.as_ref().is_some_and(|a| a.len() != nv) || opts.order.as_ref().is_some_and(|o| o.len() != nv) {
        return Err(JiggleError::Malformed("per-vertex option length differs from vertex count".into()));
    }
    let lipschitz = xi.lipschitz();
    let depth = opts.depth.max(1);
    let per_cell: Vec<Vec<(Simplex, Partial)>> = maximal
        .par_iter()
        .enumerate()
        .map(|(ci, s)| {
            let required = opts.required.as_ref().is_none_or(|r| r[ci]);
            let img = map.image_points(s);
            let m = s.len() - 1;
            let mut out = Vec::new();
            if m == 0 {
                out.push((s.clone(), Partial { transverse: true, gp: true, eps: f64::INFINITY, degenerate: false, certified: Some(true), required }));
                return out;
            }
            if shape_of_points(&img).is_degenerate() {
                for f in faces(m) {
                    let g: Simplex = f.iter().map(|&i| s[i]).collect();
                    out.push((g, Partial { transverse: false, gp: false, eps: 0.0, degenerate: true, certified: Some(false), required }));
                }
                return out;
            }
            let fs = faces(m);
            let planes: Vec<Option<Plane>> =
                fs.iter().map(|f| simplex_plane(&f.iter().map(|&i| img[i]).collect::<Vec<_>>()).ok()).collect();
            let samples: Vec<DVector<f64>> = barycentric_lattice(m, depth)
                .iter()
                .map(|mu| {
                    let mut x = DVector::zeros(n);
                    for (p, &w) in img.iter().zip(mu) {
                        x.axpy(w, p, 1.0);
                    }
                    x
                })
                .collect();
            let fields: Vec<Plane> = samples.iter().map(|x| xi.eval(x)).collect();
            let center = barycenter(&img);
            let xi_c = xi.eval(&center);
            let reach = img.iter().map(|p| (*p - &center).norm()).fold(0.0, f64::max);
            for (f, plane) in fs.iter().zip(&planes) {
                let g: Simplex = f.iter().map(|&i| s[i]).collect();
                let fpts: Vec<&DVector<f64>> = f.iter().map(|&i| img[i]).collect();
                let Some(plane) = plane else {
                    out.push((g, Partial { transverse: false, gp: false, eps: 0.0, degenerate: true, certified: Some(false), required }));
                    continue;
                };
                let fd = f.len() - 1;
                let check = |v: &Plane| -> bool {
                    if fd <= n - k {
                        is_transverse_planes(plane, v, RANK_RTOL).unwrap_or(false)
                    } else {
                        simplex_transverse(&fpts, v, RANK_RTOL).unwrap_or(false)
                    }
                };
                let transverse = check(&xi.eval(&barycenter(&fpts)));
                let mut gp = true;
                let mut eps = f64::INFINITY;
                for v in &fields {
                    let t = check(v);
                    gp &= t;
                    eps = eps.min(if t { plane_eps_margin(plane, v) } else { 0.0 });
                }
                let certified = lipschitz.map(|l| check(&xi_c) && plane_eps_margin(plane, &xi_c) > l * reach);
                out.push((g, Partial { transverse, gp, eps, degenerate: false, certified, required }));
            }
            out
        })
        .collect();

    let mut merged: BTreeMap<(usize, Simplex), Partial> = BTreeMap::new();
    for cell in per_cell {
        for (s, p) in cell {
            let key = (s.len() - 1, s);
            match merged.get_mut(&key) {
                Some(acc) => {
                    let transverse = acc.transverse;
                    merge(acc, &p);
                    acc.transverse = transverse;
                }
                None => {
                    merged.insert(key, p);
                }
            }
        }
    }

    let anchors = opts.anchors.as_deref();
    let records: Vec<SimplexRecord> = merged
        .into_par_iter()
        .map(|((dim, s), p)| {
            let semitrans_margin = if dim >= 1 && dim <= n - k && !p.degenerate {
                let last = match &opts.order {
                    Some(rank) => *s.iter().max_by_key(|&&w| rank[w]).unwrap(),
                    None => *s.last().unwrap(),
                };
                let anchor = anchors.map_or_else(|| map.image(last).clone(), |a| a[last].clone());
                let v = xi.eval(&anchor);
                let rest: Vec<&DVector<f64>> = s.iter().filter(|&&w| w != last).map(|&w| map.image(w)).collect();
                let base_ok = simplex_plane(&rest)
                    .ok()
                    .map(|pl| is_transverse_planes(&pl, &v, RANK_RTOL).unwrap_or(false))
                    .unwrap_or(false);
                Some(if base_ok { semitrans_margin_unchecked(map.image(last), &rest, &v.complement()) } else { 0.0 })
            } else {
                None
            };
            SimplexRecord {
                simplex: s,
                dim,
                semitrans_margin,
                eps_margin: if p.eps.is_finite() { Some(p.eps) } else { None },
                transverse: p.transverse,
                general_position: p.gp,
                degenerate: p.degenerate,
                certified: p.certified,
                required: p.required,
            }
        })
        .collect();

    let req: Vec<&SimplexRecord> = records.iter().filter(|r| r.required).collect();
    let min_opt = |it: &mut dyn Iterator<Item = f64>| it.fold(None, |a: Option<f64>, b| Some(a.map_or(b, |x| x.min(b))));
    let min_semitrans_margin = min_opt(&mut req.iter().filter_map(|r| r.semitrans_margin));
    let min_eps_margin = min_opt(&mut req.iter().filter(|r| r.dim >= 1).filter_map(|r| r.eps_margin));
    let certified = if lipschitz.is_some() {
        Some(req.iter().filter(|r| r.dim >= 1).all(|r| r.certified == Some(true)))
    } else {
        None
    };
    let maximal_set: std::collections::BTreeSet<&Simplex> = dom.maximal().iter().collect();
    let flags_ok = match opts.notion {
        Notion::Transverse => {
            req.iter().filter(|r| r.dim >= 1 && maximal_set.contains(&r.simplex)).all(|r| record_ok(r, opts.notion))
        }
        _ => req.iter().filter(|r| r.dim >= 1).all(|r| record_ok(r, opts.notion)),
    };
    let margins_ok = match opts.notion {
        Notion::GeneralPosition | Notion::Report => min_eps_margin.is_none_or(|e| e > opts.margin_floor),
        _ => true,
    };
    Ok(TransversalityReport {
        schema_version: REPORT_SCHEMA_VERSION,
        notion: opts.notion,
        sampled: true,
        sample_depth: depth,
        margin_floor: opts.margin_floor,
        records,
        min_semitrans_margin,
        min_eps_margin,
        certified,
        pass: flags_ok && margins_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplicial::SimplicialComplex;
    use crate::transversality::distribution::ConstantDistribution;

    fn refined_triangle() -> PLMap {
        // Δ = ⟨(0,0),(2,1),(1,3)⟩ split through d = (1/3, 1) on the edge to
        // (1,3); the new edge from d to (2,1) is horizontal.
        let k = SimplicialComplex::build(
            2,
            vec![vec![0.0, 0.0], vec![2.0, 1.0], vec![1.0, 3.0], vec![1.0 / 3.0, 1.0]],
            vec![vec![0, 1, 3], vec![1, 2, 3]],
        )
        .unwrap();
        PLMap::identity(&k)
    }

    #[test]
    fn refined_triangle_transverse_not_stratified() {
        let xi = ConstantDistribution::new(Plane::coordinate(2, &[0]));
        let f = refined_triangle();
        let t = assess(&f, &xi, &AssessOptions { notion: Notion::Transverse, ..Default::default() }).unwrap();
        assert!(t.pass);
        let s = assess(&f, &xi, &AssessOptions { notion: Notion::Stratified, ..Default::default() }).unwrap();
        assert!(!s.pass);
        let bad: Vec<&Simplex> = s.failing().map(|r| &r.simplex).collect();
        assert_eq!(bad, vec![&vec![1, 3]]);
    }

    #[test]
    fn required_mask_limits_verdict() {
        let xi = ConstantDistribution::new(Plane::coordinate(2, &[0]));
        let f = refined_triangle();
        let opts = AssessOptions { notion: Notion::GeneralPosition, required: Some(vec![false, false]), ..Default::default() };
        assert!(assess(&f, &xi, &opts).unwrap().pass);
    }
}

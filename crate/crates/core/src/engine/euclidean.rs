use nalgebra::DVector;

use super::config::JigglingConfig;
use super::induction::{self, Induction, VertexMove};
use super::level::auto_level;
use crate::error::{JiggleError, Result};
use crate::pl_maps::{distances, is_piecewise_embedding, linearize, Distances, DomainMap, PLMap};
use crate::simplicial::{shape_of_points, SimplicialComplex, SubdivisionMap};
use crate::transversality::{assess, AssessOptions, Distribution, Notion, TransversalityReport};

#[derive(Debug, Clone, PartialEq)]
pub struct JigglingOutcome {
    pub mode: String,
    pub level: u32,
    /// The jiggled map on the output complex `g.domain()`.
    pub g: PLMap,
    /// Output complex as a subdivision of the input complex.
    pub subdivision: SubdivisionMap,
    pub report: TransversalityReport,
    pub distances: Distances,
    pub epsilon_vertex: f64,
    pub moves: Vec<VertexMove>,
    /// Subdivision jiggling only: the self-map `T` of `|K|`.
    pub transform: Option<PLMap>,
}

impl JigglingOutcome {
    pub fn complex(&self) -> &SimplicialComplex {
        self.g.domain()
    }

    pub fn moved_vertices(&self) -> usize {
        self.moves.iter().filter(|m| m.displacement > 0.0).count()
    }
}

pub(crate) fn resolve_level(f: &dyn DomainMap, xi: &dyn Distribution, cfg: &JigglingConfig) -> Result<u32> {
    match cfg.level {
        Some(l) => Ok(l),
        None => auto_level(f, xi, cfg.gamma, cfg.level_margin, cfg.max_level),
    }
}

/// Per-vertex budget `ε_v` keeping the C¹ and C⁰ budgets and every image
/// simplex away from collapse, given the linearization's own errors.
pub fn vertex_budget(lin: &PLMap, lin_err: &Distances, gamma: f64, level: u32, epsilon_vertex: Option<f64>) -> Result<f64> {
    let k = lin.domain();
    let m = k.dim().unwrap_or(0) as f64;
    let scale = 0.5f64.powi(level as i32);
    let mut lambda = 0.0f64;
    let mut rmin = f64::INFINITY;
    for s in k.maximal().iter().filter(|s| s.len() > 1) {
        lambda = lambda.max(k.shape(s).lambda);
        rmin = rmin.min(shape_of_points(&lin.image_points(s)).rmin);
    }
    let c1 = (gamma - lin_err.c1) * 0.5 / (1.0 + 2.0 * m * lambda);
    let c0 = (gamma * scale - lin_err.c0) * 0.5;
    let mut eps = c1.min(c0).min(0.25 * rmin);
    if let Some(e) = epsilon_vertex {
        eps = eps.min(e * scale);
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(JiggleError::BudgetViolation(format!(
            "no room for vertex moves at level {level}: linearization errors C0 {} and C1 {} against gamma {gamma}",
            lin_err.c0, lin_err.c1
        )));
    }
    Ok(eps)
}

pub(crate) fn check_budget(d: &Distances, gamma: f64, level: u32) -> Result<()> {
    let c0_budget = gamma * 0.5f64.powi(level as i32);
    if !(d.c1 < gamma) || !(d.c0 < c0_budget) {
        return Err(JiggleError::BudgetViolation(format!(
            "C0 {} (budget {c0_budget}), C1 {} (budget {gamma})",
            d.c0, d.c1
        )));
    }
    Ok(())
}

pub(crate) fn report_failure(report: &TransversalityReport, rank: &[usize]) -> JiggleError {
    match report.failing().next() {
        Some(r) => JiggleError::PerturbationFailed {
            vertex: *r.simplex.iter().max_by_key(|&&w| rank[w]).unwrap(),
            reason: format!("simplex {:?} fails the final check", r.simplex),
        },
        None => JiggleError::PerturbationFailed {
            vertex: 0,
            reason: format!("minimal eps margin {:?} is below the floor", report.min_eps_margin),
        },
    }
}

pub(crate) fn final_report(
    g: &PLMap,
    xi: &dyn Distribution,
    cfg: &JigglingConfig,
    anchors: &[DVector<f64>],
    rank: &[usize],
    required: Option<Vec<bool>>,
) -> Result<TransversalityReport> {
    let opts = AssessOptions {
        notion: Notion::Report,
        depth: cfg.sample_depth,
        margin_floor: cfg.tolerances.margin_floor,
        required,
        anchors: Some(anchors.to_vec()),
        order: Some(rank.to_vec()),
    };
    assess(g, xi, &opts)
}

/// Linearize on `K_ℓ`, then move every vertex in global order so that all
/// image simplices end up in general position with respect to `ξ`.
pub fn jiggle_euclidean(f: &dyn DomainMap, xi: &dyn Distribution, cfg: &JigglingConfig) -> Result<JigglingOutcome> {
    cfg.validate()?;
    if f.target_dim() != xi.ambient_dim() {
        return Err(JiggleError::AmbientMismatch(f.target_dim(), xi.ambient_dim()));
    }
    let level = resolve_level(f, xi, cfg)?;
    let (lin, sub) = linearize(f, level);
    if !is_piecewise_embedding(&lin, cfg.tolerances.degeneracy) {
        return Err(JiggleError::PreconditionViolated("linearized map is not a piecewise embedding".into()));
    }
    let lin_err = distances(f, &lin, Some(&sub))?;
    let eps = vertex_budget(&lin, &lin_err, cfg.gamma, level, cfg.epsilon_vertex)?;
    let nv = lin.domain().num_vertices();
    let ind = Induction {
        complex: lin.domain(),
        anchors: lin.images(),
        order: (0..nv).collect(),
        fixed: vec![false; nv],
        excluded: vec![false; nv],
        constraints: vec![None; nv],
        epsilon: eps,
        level,
    };
    let res = induction::run(&ind, xi, cfg)?;
    let g = lin.with_images(res.images)?;
    if !is_piecewise_embedding(&g, cfg.tolerances.degeneracy) {
        return Err(JiggleError::EmbeddingLost);
    }
    let report = final_report(&g, xi, cfg, lin.images(), &res.rank, None)?;
    if !report.pass {
        return Err(report_failure(&report, &res.rank));
    }
    let d = distances(f, &g, Some(&sub))?;
    check_budget(&d, cfg.gamma, level)?;
    Ok(JigglingOutcome {
        mode: "euclidean".into(),
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

/// One Euclidean jiggling per level.
pub fn jiggle_tower(f: &dyn DomainMap, xi: &dyn Distribution, cfg: &JigglingConfig, levels: &[u32]) -> Result<Vec<JigglingOutcome>> {
    levels
        .iter()
        .map(|&l| {
            let c = JigglingConfig { level: Some(l), max_level: cfg.max_level.max(l), ..cfg.clone() };
            jiggle_euclidean(f, xi, &c).map(|mut o| {
                o.mode = "tower".into();
                o
            })
        })
        .collect()
}

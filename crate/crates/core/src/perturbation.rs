//! Moving a single vertex so that its joins with nearby simplices become
//! semitransverse, with the achieved margin maximized per instance.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{JiggleError, Result};
use crate::grassmannian::{is_transverse_planes, AffineFlat, Plane, Quotient};
use crate::linalg::RANK_RTOL;
use crate::transversality::{semitrans_margin_unchecked, simplex_transverse};

pub const DEFAULT_SAMPLES: usize = 256;
/// Step sizes of the coordinate refinement, as fractions of the stage radius.
pub const REFINE_STEPS: [f64; 3] = [1.0 / 8.0, 1.0 / 32.0, 1.0 / 128.0];
const REFINE_MAX_MOVES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchParams {
    pub seed: u64,
    pub samples: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams { seed: 0, samples: DEFAULT_SAMPLES }
    }
}

/// Flats living in one quotient `R^n / V_u`, in the quotient's coordinates.
#[derive(Debug, Clone)]
pub struct FlatGroup {
    pub quotient: Quotient,
    pub flats: Vec<AffineFlat>,
}

#[derive(Debug, Clone)]
pub struct PerturbationRequest {
    pub p: DVector<f64>,
    pub epsilon: f64,
    pub star_simplices: Vec<Vec<DVector<f64>>>,
    pub foliations: Vec<Plane>,
    pub constraint_flat: Option<AffineFlat>,
    pub search: SearchParams,
    /// Keep `p` untouched when every margin there is at least this value.
    pub incumbent_floor: Option<f64>,
}

impl PerturbationRequest {
    pub fn new(p: DVector<f64>, epsilon: f64) -> Self {
        PerturbationRequest {
            p,
            epsilon,
            star_simplices: Vec::new(),
            foliations: Vec::new(),
            constraint_flat: None,
            search: SearchParams::default(),
            incumbent_floor: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub star_index: usize,
    /// Local vertex indices of the face joined with `p′`.
    pub face: Vec<usize>,
    pub foliation: usize,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationResult {
    pub p: DVector<f64>,
    pub achieved_delta: f64,
    /// `(join dimension, radius after that stage)`, non-increasing.
    pub per_dimension: Vec<(usize, f64)>,
    pub certificate: Vec<CertificateEntry>,
    pub kept_incumbent: bool,
}

// `dist(Pᵀx, base + span Q)` precomputed as `|R (Pᵀ x − b)|` with `R = I − QQᵀ`.
struct FlatScorer {
    rows: Vec<(DMatrix<f64>, DVector<f64>)>,
}

impl FlatScorer {
    fn new(groups: &[FlatGroup]) -> Self {
        let mut rows = Vec::new();
        for g in groups {
            let pt = g.quotient.perp.basis().transpose();
            let q = g.quotient.dim();
            for f in &g.flats {
                let qb = f.direction.basis();
                let r = DMatrix::identity(q, q) - qb * qb.transpose();
                let m = &r * &pt;
                let b = &r * &f.base;
                rows.push((m, b));
            }
        }
        FlatScorer { rows }
    }

    fn min_distance(&self, x: &DVector<f64>) -> f64 {
        self.rows.iter().map(|(m, b)| (m * x - b).norm()).fold(f64::INFINITY, f64::min)
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Shifted Halton points inside the unit ball of `R^dim`, the origin first.
fn ball_candidates(dim: usize, count: usize, seed: u64) -> Vec<DVector<f64>> {
    let mut out = vec![DVector::zeros(dim)];
    if dim == 0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    let mut i = 1u64;
    let cap = 64 * count as u64 + 64;
    while out.len() <= count && i < cap {
        let v = DVector::from_iterator(
            dim,
            (0..dim).map(|j| {
                let u = (radical_inverse(i, PRIMES[j % PRIMES.len()]) + shift[j]).fract();
                2.0 * u - 1.0
            }),
        );
        if v.norm() <= 1.0 {
            out.push(v);
        }
        i += 1;
    }
    out
}

struct Domain<'a> {
    center: &'a DVector<f64>,
    // Orthonormal directions of the search (identity or `H`'s basis).
    basis: DMatrix<f64>,
    radius: f64,
}

impl Domain<'_> {
    fn point(&self, u: &DVector<f64>) -> DVector<f64> {
        self.center + &self.basis * u * self.radius
    }
}

/// Maximizes `min(outer − |x − c|, flat distance)` over `x` in the ball of
/// radius `outer / 2` around `c`, inside `H` when given.
fn search_stage(
    center: &DVector<f64>,
    outer: f64,
    basis: &DMatrix<f64>,
    scorer: &FlatScorer,
    params: &SearchParams,
    stage: u64,
) -> (DVector<f64>, f64) {
    let dom = Domain { center, basis: basis.clone(), radius: 0.5 * outer };
    let dim = basis.ncols();
    let objective = |u: &DVector<f64>| -> f64 {
        let x = dom.point(u);
        let moved = (&x - center).norm();
        (outer - moved).min(scorer.min_distance(&x))
    };
    let cands = ball_candidates(dim, params.samples, params.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(stage));
    let scores: Vec<f64> = cands.par_iter().map(&objective).collect();
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    let mut u = cands[best].clone();
    let mut score = scores[best];
    for step in REFINE_STEPS {
        let h = 2.0 * step;
        for _ in 0..REFINE_MAX_MOVES {
            let mut improved = false;
            for j in 0..dim {
                for sign in [1.0, -1.0] {
                    let mut t = u.clone();
                    t[j] += sign * h;
                    let nt = t.norm();
                    if nt > 1.0 {
                        t /= nt;
                    }
                    let s = objective(&t);
                    if s > score {
                        u = t;
                        score = s;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
    (dom.point(&u), score)
}

fn search_basis(n: usize, h: Option<&AffineFlat>) -> DMatrix<f64> {
    match h {
        Some(h) => h.direction.basis().clone(),
        None => DMatrix::identity(n, n),
    }
}

// Dimension of the quotient image of the search domain.
fn domain_dim(q: &Quotient, basis: &DMatrix<f64>) -> usize {
    if basis.ncols() == 0 {
        return 0;
    }
    crate::linalg::numerical_rank(&(q.perp.basis().transpose() * basis), RANK_RTOL)
}

fn check_constraint(p: &DVector<f64>, eps: f64, h: Option<&AffineFlat>) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(JiggleError::PreconditionViolated(format!("search radius {eps} must be positive")));
    }
    if let Some(h) = h {
        let tol = 1e-9 * (1.0 + p.norm());
        if h.distance(p) > tol {
            return Err(JiggleError::PreconditionViolated("start point is not on the constraint flat".into()));
        }
    }
    Ok(())
}

/// Searches `B(p, ε/2) ∩ H` for a point whose `δ`-ball stays in `B(p, ε)`
/// and misses every listed flat in its quotient.
pub fn avoid_flats(
    p: &DVector<f64>,
    eps: f64,
    groups: &[FlatGroup],
    h: Option<&AffineFlat>,
    params: &SearchParams,
) -> Result<(DVector<f64>, f64)> {
    check_constraint(p, eps, h)?;
    let basis = search_basis(p.len(), h);
    for g in groups {
        let dom = domain_dim(&g.quotient, &basis);
        for f in &g.flats {
            if f.dim() >= dom {
                return Err(JiggleError::InfeasibleDimensions { flat: f.dim(), domain: dom });
            }
        }
    }
    let scorer = FlatScorer::new(groups);
    if scorer.rows.is_empty() {
        return Ok((p.clone(), eps));
    }
    let (x, s) = search_stage(p, eps, &basis, &scorer, params, 0);
    let d = clamp_nested(p, &x, eps, s);
    Ok((x, d))
}

// Largest value not above `delta` with `|x − p| + delta ≤ eps` in floating point.
fn clamp_nested(p: &DVector<f64>, x: &DVector<f64>, eps: f64, delta: f64) -> f64 {
    let moved = (x - p).norm();
    let mut d = delta.min(eps - moved);
    while d > 0.0 && moved + d > eps {
        d = d.next_down();
    }
    d
}

struct FaceFlat {
    star_index: usize,
    face: Vec<usize>,
    foliation: usize,
    dim: usize,
    flat: AffineFlat,
}

fn face_subsets(len: usize) -> Vec<Vec<usize>> {
    (1u32..(1u32 << len)).map(|mask| (0..len).filter(|i| mask >> i & 1 == 1).collect()).collect()
}

fn bits_key(pts: &[&DVector<f64>]) -> Vec<Vec<u64>> {
    let mut k: Vec<Vec<u64>> = pts.iter().map(|p| p.iter().map(|x| x.to_bits()).collect()).collect();
    k.sort();
    k
}

/// Largest join dimension searched for a constraint of dimension `h`.
pub fn max_join_dim(n: usize, k: usize, h: Option<usize>) -> usize {
    match h {
        Some(h) if h <= n - k => h,
        _ => n - k,
    }
}

fn collect_face_flats(req: &PerturbationRequest, quotients: &[Quotient], dmax: usize) -> Result<Vec<FaceFlat>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (si, s) in req.star_simplices.iter().enumerate() {
        if s.len() > 1 {
            let pts: Vec<&DVector<f64>> = s.iter().collect();
            for v in &req.foliations {
                if !simplex_transverse(&pts, v, RANK_RTOL).unwrap_or(false) {
                    return Err(JiggleError::StarNotTransverse(si));
                }
            }
        }
        for face in face_subsets(s.len()) {
            let dim = face.len();
            if dim > dmax {
                continue;
            }
            let pts: Vec<&DVector<f64>> = face.iter().map(|&i| &s[i]).collect();
            if !seen.insert(bits_key(&pts)) {
                continue;
            }
            for (u, (v, q)) in req.foliations.iter().zip(quotients).enumerate() {
                if pts.len() > 1 && !simplex_transverse(&pts, v, RANK_RTOL).unwrap_or(false) {
                    return Err(JiggleError::StarNotTransverse(si));
                }
                let proj: Vec<DVector<f64>> = pts.iter().map(|x| q.apply(x)).collect();
                let flat = AffineFlat::through(&proj.iter().collect::<Vec<_>>());
                out.push(FaceFlat { star_index: si, face: face.clone(), foliation: u, dim, flat });
            }
        }
    }
    Ok(out)
}

fn certificate(p: &DVector<f64>, req: &PerturbationRequest, quotients: &[Quotient], flats: &[FaceFlat]) -> Vec<CertificateEntry> {
    flats
        .iter()
        .map(|f| {
            let s = &req.star_simplices[f.star_index];
            let pts: Vec<&DVector<f64>> = f.face.iter().map(|&i| &s[i]).collect();
            CertificateEntry {
                star_index: f.star_index,
                face: f.face.clone(),
                foliation: f.foliation,
                margin: semitrans_margin_unchecked(p, &pts, &quotients[f.foliation].perp),
            }
        })
        .collect()
}

/// Moves `p` inside `B(p, ε)` (and `H`) so every join of dimension up to
/// `n − k` with a face of the star simplices is semitransverse in the new
/// point to every foliation. Join dimensions are handled one stage at a
/// time, each stage recentering within half of its incoming radius.
pub fn perturb_vertex(req: &PerturbationRequest) -> Result<PerturbationResult> {
    let n = req.p.len();
    let h = req.constraint_flat.as_ref();
    check_constraint(&req.p, req.epsilon, h)?;
    for v in &req.foliations {
        if v.ambient_dim() != n {
            return Err(JiggleError::AmbientMismatch(v.ambient_dim(), n));
        }
        if let Some(h) = h {
            if !is_transverse_planes(&h.direction, v, RANK_RTOL)? {
                return Err(JiggleError::PreconditionViolated("constraint flat is not transverse to a foliation".into()));
            }
        }
    }
    for s in &req.star_simplices {
        if s.iter().any(|x| x.len() != n) {
            return Err(JiggleError::AmbientMismatch(s[0].len(), n));
        }
    }
    let quotients: Vec<Quotient> = req.foliations.iter().map(Quotient::new).collect();
    let kmin = req.foliations.iter().map(|v| v.dim()).min().unwrap_or(n);
    let dmax = max_join_dim(n, kmin, h.map(|h| h.dim()));
    let flats = collect_face_flats(req, &quotients, dmax)?;
    let basis = search_basis(n, h);
    for f in &flats {
        let dom = domain_dim(&quotients[f.foliation], &basis);
        if f.flat.dim() >= dom {
            return Err(JiggleError::InfeasibleDimensions { flat: f.flat.dim(), domain: dom });
        }
    }

    if let Some(floor) = req.incumbent_floor {
        let cert = certificate(&req.p, req, &quotients, &flats);
        let m = cert.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
        if m >= floor {
            let delta = m.min(req.epsilon);
            let per_dimension = (1..=dmax).map(|d| (d, delta)).collect();
            return Ok(PerturbationResult { p: req.p.clone(), achieved_delta: delta, per_dimension, certificate: cert, kept_incumbent: true });
        }
    }

    let mut center = req.p.clone();
    let mut radius = req.epsilon;
    let mut per_dimension = Vec::new();
    let mut active: Vec<FlatGroup> = quotients.iter().map(|q| FlatGroup { quotient: q.clone(), flats: Vec::new() }).collect();
    for d in 1..=dmax {
        let mut added = false;
        for f in flats.iter().filter(|f| f.dim == d) {
            active[f.foliation].flats.push(f.flat.clone());
            added = true;
        }
        if added {
            let scorer = FlatScorer::new(&active);
            let (x, s) = search_stage(&center, radius, &basis, &scorer, &req.search, d as u64);
            radius = clamp_nested(&center, &x, radius, s);
            center = x;
        }
        per_dimension.push((d, radius));
    }
    let cert = certificate(&center, req, &quotients, &flats);
    let m = cert.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    let delta = clamp_nested(&req.p, &center, req.epsilon, radius.min(m));
    if let Some(last) = per_dimension.last_mut() {
        last.1 = last.1.min(delta);
    }
    Ok(PerturbationResult { p: center, achieved_delta: delta, per_dimension, certificate: cert, kept_incumbent: false })
}

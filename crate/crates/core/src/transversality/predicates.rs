use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::distribution::Distribution;
use crate::error::{JiggleError, Result};
use crate::grassmannian::{d_proj, is_transverse_planes, Plane};
use crate::linalg::{columns, dist_to_affine_span, min_singular, numerical_rank, orthonormal_columns, residual, RANK_RTOL};
use crate::pl_maps::barycentric_lattice;
use crate::simplicial::{shape_of_points, ShapeStats};

/// Relative tolerance for deciding that a projected point lies on a projected flat.
pub const MEMBERSHIP_RTOL: f64 = 1e-9;

/// `Gr(Δ)`, the linear plane parallel to the simplex.
pub fn simplex_plane(pts: &[&DVector<f64>]) -> Result<Plane> {
    let n = pts[0].len();
    if pts.len() == 1 {
        return Ok(Plane::zero(n));
    }
    let edges: Vec<DVector<f64>> = pts[1..].iter().map(|p| *p - pts[0]).collect();
    let m = columns(&edges, n);
    if shape_of_points(pts).is_degenerate() {
        return Err(JiggleError::DegenerateSimplex(Vec::new()));
    }
    orthonormal_columns(&m, RANK_RTOL).map(Plane::from_orthonormal).ok_or(JiggleError::DegenerateSimplex(Vec::new()))
}

/// All faces of a simplex of dimension ≥ 1, as local index lists.
pub fn faces(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << (m + 1)) {
        if mask.count_ones() >= 2 {
            out.push((0..=m).filter(|i| mask >> i & 1 == 1).collect());
        }
    }
    out
}

fn faces_of_dim(m: usize, d: usize) -> Vec<Vec<usize>> {
    faces(m).into_iter().filter(|f| f.len() == d + 1).collect()
}

/// Transversality of a simplex to a constant foliation. Above dimension
/// `n − k` this asks for some transverse `(n − k)`-face.
pub fn simplex_transverse(pts: &[&DVector<f64>], v: &Plane, rtol: f64) -> Result<bool> {
    let n = v.ambient_dim();
    let k = v.dim();
    let d = pts.len() - 1;
    let plane = simplex_plane(pts)?;
    if d <= n - k {
        return is_transverse_planes(&plane, v, rtol);
    }
    for f in faces_of_dim(d, n - k) {
        let sub: Vec<&DVector<f64>> = f.iter().map(|&i| pts[i]).collect();
        if is_transverse_planes(&simplex_plane(&sub)?, v, rtol)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Transversality of the join `⟨p, Δ⟩`; degenerate joins are not transverse.
pub fn join_transverse(p: &DVector<f64>, delta: &[&DVector<f64>], v: &Plane, rtol: f64) -> bool {
    let mut pts: Vec<&DVector<f64>> = vec![p];
    pts.extend_from_slice(delta);
    simplex_transverse(&pts, v, rtol).unwrap_or(false)
}

/// Both projection criteria for the join `⟨p, Δ⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionCriteria {
    /// Distance from `π_V(p)` to `π_V(ASpan Δ)`.
    pub quotient_distance: f64,
    /// Distance from `π_Δ(p)` to `π_Δ(V)`.
    pub dual_distance: f64,
    pub quotient: bool,
    pub dual: bool,
}

fn check_join_preconditions(delta: &[&DVector<f64>], v: &Plane) -> Result<Plane> {
    let n = v.ambient_dim();
    let k = v.dim();
    let d = delta.len() - 1;
    if d + 1 > n - k {
        return Err(JiggleError::PreconditionViolated(format!("dim Δ + 1 = {} exceeds n − k = {}", d + 1, n - k)));
    }
    let plane = simplex_plane(delta).map_err(|_| JiggleError::PreconditionViolated("Δ is degenerate".into()))?;
    if !is_transverse_planes(&plane, v, RANK_RTOL)? {
        return Err(JiggleError::PreconditionViolated("Δ is not transverse to V".into()));
    }
    Ok(plane)
}

pub fn projection_criteria(p: &DVector<f64>, delta: &[&DVector<f64>], v: &Plane) -> Result<ProjectionCriteria> {
    let plane = check_join_preconditions(delta, v)?;
    let perp = v.complement();
    let proj = |x: &DVector<f64>| perp.basis().transpose() * x;
    let pp = proj(p);
    let pd: Vec<DVector<f64>> = delta.iter().map(|x| proj(x)).collect();
    let quotient_distance = dist_to_affine_span(&pp, &pd.iter().collect::<Vec<_>>());

    let r = residual(&(p - delta[0]), plane.basis());
    let pv = v.basis() - plane.basis() * (plane.basis().transpose() * v.basis());
    let dual_distance = match orthonormal_columns(&pv, RANK_RTOL) {
        Some(q) => residual(&r, &q).norm(),
        None => residual(&r, &rank_basis(&pv)).norm(),
    };
    let mut all: Vec<&DVector<f64>> = vec![p];
    all.extend_from_slice(delta);
    let scale = shape_of_points(&all).rmax.max(f64::MIN_POSITIVE);
    Ok(ProjectionCriteria {
        quotient_distance,
        dual_distance,
        quotient: quotient_distance > MEMBERSHIP_RTOL * scale,
        dual: dual_distance > MEMBERSHIP_RTOL * scale,
    })
}

fn rank_basis(m: &DMatrix<f64>) -> DMatrix<f64> {
    let r = numerical_rank(m, RANK_RTOL);
    if r == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let cols: Vec<DVector<f64>> = idx[..r].iter().map(|&i| u.column(i).clone_owned()).collect();
    columns(&cols, m.nrows())
}

/// `π_V(p) ∉ π_V(ASpan Δ)`, cross-checked against the dual criterion.
pub fn join_transverse_by_projection(p: &DVector<f64>, delta: &[&DVector<f64>], v: &Plane) -> Result<bool> {
    let c = projection_criteria(p, delta, v)?;
    debug_assert_eq!(c.quotient, c.dual, "projection criteria disagree: {c:?}");
    Ok(c.quotient)
}

/// Largest `δ` with `⟨p′, Δ⟩` non-degenerate and transverse for all `p′` in
/// the open `δ`-ball around `p`.
pub fn semitrans_margin(p: &DVector<f64>, delta: &[&DVector<f64>], v: &Plane) -> Result<f64> {
    check_join_preconditions(delta, v)?;
    Ok(semitrans_margin_unchecked(p, delta, &v.complement()))
}

/// Distance in the quotient, given the complement basis of `V`.
pub fn semitrans_margin_unchecked(p: &DVector<f64>, delta: &[&DVector<f64>], perp: &Plane) -> f64 {
    let proj = |x: &DVector<f64>| perp.basis().transpose() * x;
    let pd: Vec<DVector<f64>> = delta.iter().map(|x| proj(x)).collect();
    dist_to_affine_span(&proj(p), &pd.iter().collect::<Vec<_>>())
}

/// Exact `d_proj` radius around `d` inside which planes stay transverse to `v`;
/// zero when `d` itself is not transverse.
pub fn plane_eps_margin(d: &Plane, v: &Plane) -> f64 {
    let n = v.ambient_dim();
    let (dd, k) = (d.dim(), v.dim());
    if dd == 0 || k == 0 || dd == n {
        return f64::INFINITY;
    }
    if dd + k <= n {
        min_singular(&(d.basis() - v.basis() * (v.basis().transpose() * d.basis())))
    } else {
        let dp = d.complement();
        min_singular(&(v.basis() * (v.basis().transpose() * dp.basis())))
    }
}

/// `ε`-transversality estimate of a simplex: smallest principal-angle sine
/// between `Gr(Δ)` and `V` (or between their complements above `n − k`).
pub fn eps_margin(pts: &[&DVector<f64>], v: &Plane) -> Result<f64> {
    let eps = plane_eps_margin(&simplex_plane(pts)?, v);
    if eps <= RANK_RTOL {
        Err(JiggleError::NotTransverse)
    } else {
        Ok(eps)
    }
}

/// Every face of dimension ≥ 1 is transverse.
pub fn stratified_transverse(pts: &[&DVector<f64>], v: &Plane, rtol: f64) -> Result<bool> {
    if shape_of_points(pts).is_degenerate() {
        return Err(JiggleError::DegenerateSimplex(Vec::new()));
    }
    for f in faces(pts.len() - 1) {
        let sub: Vec<&DVector<f64>> = f.iter().map(|&i| pts[i]).collect();
        if !simplex_transverse(&sub, v, rtol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralPosition {
    pub ok: bool,
    pub margin: f64,
}

/// Sampled general position: every face against `ξ_x` at every point `x` of
/// the barycentric lattice of the given depth on `Δ`.
pub fn general_position(pts: &[&DVector<f64>], xi: &dyn Distribution, depth: usize) -> Result<GeneralPosition> {
    if shape_of_points(pts).is_degenerate() {
        return Err(JiggleError::DegenerateSimplex(Vec::new()));
    }
    let fs = faces(pts.len() - 1);
    let planes: Vec<Plane> = fs
        .iter()
        .map(|f| simplex_plane(&f.iter().map(|&i| pts[i]).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let mut ok = true;
    let mut margin = f64::INFINITY;
    for mu in barycentric_lattice(pts.len() - 1, depth.max(1)) {
        let mut x = DVector::zeros(pts[0].len());
        for (p, &w) in pts.iter().zip(&mu) {
            x.axpy(w, p, 1.0);
        }
        let v = xi.eval(&x);
        for (f, plane) in fs.iter().zip(&planes) {
            let t = if f.len() - 1 <= v.ambient_dim() - v.dim() {
                is_transverse_planes(plane, &v, RANK_RTOL)?
            } else {
                let sub: Vec<&DVector<f64>> = f.iter().map(|&i| pts[i]).collect();
                simplex_transverse(&sub, &v, RANK_RTOL)?
            };
            ok &= t;
            margin = margin.min(if t { plane_eps_margin(plane, &v) } else { 0.0 });
        }
    }
    Ok(GeneralPosition { ok, margin })
}

/// Largest `d_proj(ξ_x, ξ_y)` over sample pairs at distance at most `r`.
pub fn oscillation(xi: &dyn Distribution, samples: &[DVector<f64>], r: f64) -> f64 {
    if samples.len() < 2 || r <= 0.0 {
        return 0.0;
    }
    let projs: Vec<DMatrix<f64>> = samples.iter().map(|x| xi.eval(x).projector()).collect();
    let n = samples[0].len();
    let key = |x: &DVector<f64>| -> Vec<i64> { x.iter().map(|c| (c / r).floor() as i64).collect() };
    let mut buckets: std::collections::BTreeMap<Vec<i64>, Vec<usize>> = std::collections::BTreeMap::new();
    for (i, x) in samples.iter().enumerate() {
        buckets.entry(key(x)).or_default().push(i);
    }
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(n as u32))
        .map(|mut c| {
            (0..n)
                .map(|_| {
                    let o = (c % 3) as i64 - 1;
                    c /= 3;
                    o
                })
                .collect()
        })
        .collect();
    let mut beta = 0.0f64;
    for (i, x) in samples.iter().enumerate() {
        let kx = key(x);
        for off in &offsets {
            let nb: Vec<i64> = kx.iter().zip(off).map(|(a, b)| a + b).collect();
            if let Some(js) = buckets.get(&nb) {
                for &j in js {
                    if j > i && (x - &samples[j]).norm() <= r {
                        beta = beta.max(crate::linalg::op_norm(&(&projs[i] - &projs[j])));
                    }
                }
            }
        }
    }
    beta
}

/// Oscillation of `ξ` over the lattice points of a simplex.
pub fn oscillation_on_simplex(xi: &dyn Distribution, pts: &[&DVector<f64>], depth: usize, r: f64) -> f64 {
    let samples: Vec<DVector<f64>> = barycentric_lattice(pts.len() - 1, depth)
        .into_iter()
        .map(|mu| {
            let mut x = DVector::zeros(pts[0].len());
            for (p, &w) in pts.iter().zip(&mu) {
                x.axpy(w, p, 1.0);
            }
            x
        })
        .collect();
    oscillation(xi, &samples, r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferKind {
    /// Foliation moves by `β` over distance `r`: `γ − βr`.
    FolChange,
    /// Simplex moves within a field of oscillation `β`: `γ − 2βr`.
    SimplexChange,
    /// Vertex perturbation size keeping transversality: `C min{δ, rmin, δ/(Λ rmax)}`.
    Zeta,
    /// `ε`-transversality from a perturbation size `ζ` (passed as `delta`): `C ζ / rmax`.
    EpsFromZeta,
}

pub fn transfer_margins(kind: TransferKind, gamma: f64, beta: f64, r: f64, shape: &ShapeStats, delta: f64, c: f64) -> f64 {
    let v = match kind {
        TransferKind::FolChange => gamma - beta * r,
        TransferKind::SimplexChange => gamma - 2.0 * beta * r,
        TransferKind::Zeta => c * delta.min(shape.rmin).min(delta / (shape.lambda * shape.rmax)),
        TransferKind::EpsFromZeta => c * delta / shape.rmax,
    };
    v.max(0.0)
}

/// `d_proj` between `ξ` at two points; convenience for callers holding points.
pub fn xi_distance(xi: &dyn Distribution, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    d_proj(&xi.eval(x), &xi.eval(y)).unwrap_or(f64::INFINITY)
}

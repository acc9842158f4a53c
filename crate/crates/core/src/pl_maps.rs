//! Piecewise linear and sampled maps on polyhedra, linearization, distances
//! over a common subdivision and the jiggling verdict.

use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{JiggleError, Result};
use crate::linalg::{columns, op_norm, pinv};
use crate::simplicial::complex::first_bad_pair;
use crate::simplicial::{crystalline_subdivide, shape_of_points, Simplex, SimplicialComplex, Subcomplex, SubdivisionMap};

/// Barycentric lattice depth used for sup-distances.
pub const SAMPLE_DEPTH: usize = 3;

/// A point of a map's domain, located in one of the domain's simplices.
#[derive(Debug, Clone, Copy)]
pub struct Locus<'a> {
    pub x: &'a DVector<f64>,
    pub simplex: &'a [usize],
    pub bary: &'a [f64],
    /// Size of the simplex the sample was drawn from; sets finite-difference steps.
    pub scale: f64,
}

pub trait DomainMap: Send + Sync {
    fn domain(&self) -> &SimplicialComplex;
    fn target_dim(&self) -> usize;
    fn value(&self, at: &Locus) -> DVector<f64>;
    /// Derivative as a `target × ambient` matrix. Only its restriction to the
    /// tangent space of the locus simplex is meaningful.
    fn jacobian(&self, at: &Locus) -> DMatrix<f64>;
    fn as_pl(&self) -> Option<&PLMap> {
        None
    }
}

/// Affine extension of vertex images over each simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct PLMap {
    domain: SimplicialComplex,
    target_dim: usize,
    images: Vec<DVector<f64>>,
}

impl PLMap {
    pub fn new(domain: SimplicialComplex, target_dim: usize, images: Vec<DVector<f64>>) -> Result<Self> {
        if images.len() != domain.num_vertices() {
            return Err(JiggleError::Malformed(format!(
                "{} images for {} vertices",
                images.len(),
                domain.num_vertices()
            )));
        }
        if let Some(bad) = images.iter().find(|p| p.len() != target_dim) {
            return Err(JiggleError::AmbientMismatch(bad.len(), target_dim));
        }
        if images.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(JiggleError::Malformed("non-finite image coordinate".into()));
        }
        Ok(PLMap { domain, target_dim, images })
    }

    pub fn identity(domain: &SimplicialComplex) -> Self {
        PLMap { domain: domain.clone(), target_dim: domain.ambient_dim(), images: domain.vertices().to_vec() }
    }

    pub fn domain(&self) -> &SimplicialComplex {
        &self.domain
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn images(&self) -> &[DVector<f64>] {
        &self.images
    }

    pub fn image(&self, v: usize) -> &DVector<f64> {
        &self.images[v]
    }

    pub fn image_points(&self, s: &[usize]) -> Vec<&DVector<f64>> {
        s.iter().map(|&v| &self.images[v]).collect()
    }

    pub fn with_images(&self, images: Vec<DVector<f64>>) -> Result<Self> {
        PLMap::new(self.domain.clone(), self.target_dim, images)
    }

    pub fn into_parts(self) -> (SimplicialComplex, usize, Vec<DVector<f64>>) {
        (self.domain, self.target_dim, self.images)
    }

    /// Constant derivative on a simplex, zero normal to it.
    pub fn simplex_jacobian(&self, s: &[usize]) -> DMatrix<f64> {
        simplex_affine_jacobian(&self.domain.points(s), &self.image_points(s), self.target_dim)
    }
}

/// Derivative of the affine map sending `dom[i]` to `img[i]`.
pub fn simplex_affine_jacobian(dom: &[&DVector<f64>], img: &[&DVector<f64>], target_dim: usize) -> DMatrix<f64> {
    let n_dom = dom[0].len();
    if dom.len() < 2 {
        return DMatrix::zeros(target_dim, n_dom);
    }
    let a: Vec<DVector<f64>> = dom[1..].iter().map(|p| *p - dom[0]).collect();
    let f: Vec<DVector<f64>> = img[1..].iter().map(|p| *p - img[0]).collect();
    columns(&f, target_dim) * pinv(&columns(&a, n_dom))
}

impl DomainMap for PLMap {
    fn domain(&self) -> &SimplicialComplex {
        &self.domain
    }

    fn target_dim(&self) -> usize {
        self.target_dim
    }

    fn value(&self, at: &Locus) -> DVector<f64> {
        let mut y = DVector::zeros(self.target_dim);
        for (&v, &w) in at.simplex.iter().zip(at.bary) {
            if w != 0.0 {
                y.axpy(w, &self.images[v], 1.0);
            }
        }
        y
    }

    fn jacobian(&self, at: &Locus) -> DMatrix<f64> {
        self.simplex_jacobian(at.simplex)
    }

    fn as_pl(&self) -> Option<&PLMap> {
        Some(self)
    }
}

pub type PointFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// Black-box map on `|K|`, with an optional analytic derivative. Without one,
/// derivatives are central differences with step `1e-6 · rmax`.
#[derive(Clone)]
pub struct SampledMap {
    domain: SimplicialComplex,
    target_dim: usize,
    eval: PointFn,
    jacobian: Option<JacobianFn>,
}

impl std::fmt::Debug for SampledMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SampledMap")
            .field("target_dim", &self.target_dim)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl SampledMap {
    pub fn new(domain: SimplicialComplex, target_dim: usize, eval: PointFn, jacobian: Option<JacobianFn>) -> Self {
        SampledMap { domain, target_dim, eval, jacobian }
    }

    pub fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.eval)(x)
    }
}

impl DomainMap for SampledMap {
    fn domain(&self) -> &SimplicialComplex {
        &self.domain
    }

    fn target_dim(&self) -> usize {
        self.target_dim
    }

    fn value(&self, at: &Locus) -> DVector<f64> {
        (self.eval)(at.x)
    }

    fn jacobian(&self, at: &Locus) -> DMatrix<f64> {
        if let Some(j) = &self.jacobian {
            return j(at.x);
        }
        let n = at.x.len();
        let h = 1e-6 * at.scale.max(1e-300);
        let mut jac = DMatrix::zeros(self.target_dim, n);
        for i in 0..n {
            let mut xp = at.x.clone();
            let mut xm = at.x.clone();
            xp[i] += h;
            xm[i] -= h;
            let d = ((self.eval)(&xp) - (self.eval)(&xm)) / (2.0 * h);
            jac.set_column(i, &d);
        }
        jac
    }
}

/// All barycentric weight vectors on an `m`-simplex with denominator `depth`.
pub fn barycentric_lattice(m: usize, depth: usize) -> Vec<Vec<f64>> {
    fn rec(left: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for a in (0..=left).rev() {
            cur.push(a);
            rec(left - a, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    rec(depth, m + 1, &mut Vec::new(), &mut raw);
    raw.into_iter().map(|c| c.into_iter().map(|a| a as f64 / depth as f64).collect()).collect()
}

/// Location in the parent complex of a point of a child simplex.
pub fn parent_location(sub: &SubdivisionMap, child_simplex: &[usize], mu: &[f64]) -> (Simplex, Vec<f64>) {
    let carrier = sub.carrier(child_simplex);
    let mut w = vec![0.0; carrier.len()];
    for (&v, &m) in child_simplex.iter().zip(mu) {
        for &(p, u) in &sub.weights[v] {
            let i = carrier.binary_search(&p).expect("carrier contains support");
            w[i] += m * u;
        }
    }
    (carrier, w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distances {
    pub c0: f64,
    pub c1: f64,
}

/// Orthogonal projector onto the tangent space of a simplex.
fn tangent_projector(pts: &[&DVector<f64>]) -> DMatrix<f64> {
    let n = pts[0].len();
    if pts.len() < 2 {
        return DMatrix::zeros(n, n);
    }
    let a = columns(&pts[1..].iter().map(|p| *p - pts[0]).collect::<Vec<_>>(), n);
    &a * pinv(&a)
}

/// C⁰ and C¹ distances between `f` (on `K`) and `g` (on `K′`). `sub` records
/// `K′` as a subdivision of `K`; `None` means both live on the same complex.
/// The C¹ distance is the sup-distance plus the sup of the operator norm of
/// the derivative difference, both over top simplices of `K′`.
pub fn distances(f: &dyn DomainMap, g: &dyn DomainMap, sub: Option<&SubdivisionMap>) -> Result<Distances> {
    let fine = g.domain();
    if f.target_dim() != g.target_dim() {
        return Err(JiggleError::DomainMismatch);
    }
    let identity;
    let sub = match sub {
        Some(s) => {
            if s.parent_vertices != f.domain().num_vertices() || s.child_vertices() != fine.num_vertices() {
                return Err(JiggleError::DomainMismatch);
            }
            s
        }
        None => {
            if f.domain() != fine {
                return Err(JiggleError::DomainMismatch);
            }
            identity = SubdivisionMap::identity(fine.num_vertices());
            &identity
        }
    };
    let cells: Vec<&Simplex> = fine.maximal().iter().collect();
    let per: Vec<Distances> = cells
        .par_iter()
        .map(|s| {
            let pts = fine.points(s);
            let shape = shape_of_points(&pts);
            let proj = tangent_projector(&pts);
            let mut c0 = 0.0f64;
            let mut d1 = 0.0f64;
            for mu in barycentric_lattice(s.len() - 1, SAMPLE_DEPTH) {
                let mut x = DVector::zeros(fine.ambient_dim());
                for (p, &m) in pts.iter().zip(&mu) {
                    x.axpy(m, p, 1.0);
                }
                let (carrier, pw) = parent_location(sub, s, &mu);
                let at_f = Locus { x: &x, simplex: &carrier, bary: &pw, scale: shape.rmax };
                let at_g = Locus { x: &x, simplex: s, bary: &mu, scale: shape.rmax };
                c0 = c0.max((f.value(&at_f) - g.value(&at_g)).norm());
                let dj = (f.jacobian(&at_f) - g.jacobian(&at_g)) * &proj;
                d1 = d1.max(op_norm(&dj));
            }
            Distances { c0, c1: d1 }
        })
        .collect();
    let c0 = per.iter().map(|d| d.c0).fold(0.0, f64::max);
    let d1 = per.iter().map(|d| d.c1).fold(0.0, f64::max);
    Ok(Distances { c0, c1: c0 + d1 })
}

pub fn distance(f: &dyn DomainMap, g: &dyn DomainMap, sub: Option<&SubdivisionMap>, order: u8) -> Result<f64> {
    let d = distances(f, g, sub)?;
    Ok(if order == 0 { d.c0 } else { d.c1 })
}

/// Values of `f` at the vertices of a subdivision of its domain.
pub fn values_on_subdivision(f: &dyn DomainMap, sub: &SubdivisionMap, child: &SimplicialComplex) -> Vec<DVector<f64>> {
    (0..child.num_vertices())
        .into_par_iter()
        .map(|v| {
            let (carrier, w) = parent_location(sub, &[v], &[1.0]);
            f.value(&Locus { x: child.vertex(v), simplex: &carrier, bary: &w, scale: 0.0 })
        })
        .collect()
}

/// `f^lin_ℓ`: the PL map on `K_ℓ` agreeing with `f` on its vertices.
pub fn linearize(f: &dyn DomainMap, level: u32) -> (PLMap, SubdivisionMap) {
    let (kl, sub) = crystalline_subdivide(f.domain(), level);
    let images = values_on_subdivision(f, &sub, &kl);
    (PLMap { domain: kl, target_dim: f.target_dim(), images }, sub)
}

/// Linearization over a subcomplex `K′`, blended back to `f` across the ring
/// of `K′_ℓ` with the join parameter `t` (the PL function equal to 1 on the
/// vertices of `K′_ℓ` and 0 on the others).
pub struct HybridMap<'a> {
    f: &'a dyn DomainMap,
    lin: PLMap,
    sub: SubdivisionMap,
    inside: Vec<bool>,
}

impl<'a> HybridMap<'a> {
    pub fn lin(&self) -> &PLMap {
        &self.lin
    }

    pub fn subdivision(&self) -> &SubdivisionMap {
        &self.sub
    }

    /// Join parameter at a point with barycentric `bary` in `simplex` of `K_ℓ`.
    pub fn join_parameter(&self, simplex: &[usize], bary: &[f64]) -> f64 {
        simplex.iter().zip(bary).filter(|(v, _)| self.inside[**v]).map(|(_, w)| w).sum()
    }

    fn parent_locus<R>(&self, at: &Locus, k: impl FnOnce(&Locus) -> R) -> R {
        let (carrier, w) = parent_location(&self.sub, at.simplex, at.bary);
        k(&Locus { x: at.x, simplex: &carrier, bary: &w, scale: at.scale })
    }
}

impl DomainMap for HybridMap<'_> {
    fn domain(&self) -> &SimplicialComplex {
        &self.lin.domain
    }

    fn target_dim(&self) -> usize {
        self.lin.target_dim
    }

    fn value(&self, at: &Locus) -> DVector<f64> {
        let t = self.join_parameter(at.simplex, at.bary);
        let fv = self.parent_locus(at, |l| self.f.value(l));
        if t == 0.0 {
            return fv;
        }
        let lv = self.lin.value(at);
        lv * t + fv * (1.0 - t)
    }

    fn jacobian(&self, at: &Locus) -> DMatrix<f64> {
        let t = self.join_parameter(at.simplex, at.bary);
        let fj = self.parent_locus(at, |l| self.f.jacobian(l));
        let has_inside = at.simplex.iter().any(|v| self.inside[*v]);
        if !has_inside {
            return fj;
        }
        let lj = self.lin.jacobian(at);
        let lv = self.lin.value(at);
        let fv = self.parent_locus(at, |l| self.f.value(l));
        // Gradient of t on the simplex: derivative of the PL indicator.
        let pts = self.lin.domain.points(at.simplex);
        let ind: Vec<DVector<f64>> =
            at.simplex.iter().map(|v| DVector::from_element(1, if self.inside[*v] { 1.0 } else { 0.0 })).collect();
        let grad_t = simplex_affine_jacobian(&pts, &ind.iter().collect::<Vec<_>>(), 1);
        lj * t + fj * (1.0 - t) + (lv - fv) * grad_t
    }
}

/// Relative linearization. `restrict_to` is a subcomplex of `K`; `collar`
/// bounds how far the blended region may reach outside `|K′|`.
pub fn linearize_relative<'a>(
    f: &'a dyn DomainMap,
    level: u32,
    restrict_to: &Subcomplex,
    collar: f64,
) -> Result<HybridMap<'a>> {
    let (lin, sub) = linearize(f, level);
    let kl = &lin.domain;
    let inside: Vec<bool> = (0..kl.num_vertices()).map(|v| restrict_to.contains(&sub.vertex_carrier(v))).collect();
    let region = Subcomplex::closure_of((0..kl.num_vertices()).filter(|&v| inside[v]).map(|v| vec![v]));
    let ring = kl.ring(&region)?;
    let reach = ring.maximal().iter().map(|s| kl.shape(s).rmax).fold(0.0, f64::max);
    if reach >= collar {
        return Err(JiggleError::CollarTooSmall(format!("ring simplices reach {reach}, collar is {collar}")));
    }
    Ok(HybridMap { f, lin, sub, inside })
}

/// A pair of opposing faces of a simplex, given as local vertex positions.
fn check_opposing(m: usize, a: &[usize], b: &[usize]) -> Result<()> {
    let sa: BTreeSet<usize> = a.iter().copied().collect();
    let sb: BTreeSet<usize> = b.iter().copied().collect();
    if sa.len() != a.len() || sb.len() != b.len() || !sa.is_disjoint(&sb) || sa.len() + sb.len() != m + 1 {
        return Err(JiggleError::NotOpposingFaces);
    }
    if sa.iter().chain(sb.iter()).any(|&i| i > m) || a.is_empty() || b.is_empty() {
        return Err(JiggleError::NotOpposingFaces);
    }
    Ok(())
}

pub type SimplexFn<'a> = &'a dyn Fn(&DVector<f64>) -> DVector<f64>;

/// Blend of `s_a` and `s_b` on `Δ = A * B` along the join parameter: equal to
/// `s_a` on `A` and to `s_b` on `B`.
pub struct Interpolation<'a> {
    pts: Vec<DVector<f64>>,
    a: Vec<usize>,
    s_a: SimplexFn<'a>,
    s_b: SimplexFn<'a>,
}

impl Interpolation<'_> {
    pub fn point(&self, bary: &[f64]) -> DVector<f64> {
        let mut x = DVector::zeros(self.pts[0].len());
        for (p, &w) in self.pts.iter().zip(bary) {
            x.axpy(w, p, 1.0);
        }
        x
    }

    pub fn eval(&self, bary: &[f64]) -> DVector<f64> {
        let t: f64 = self.a.iter().map(|&i| bary[i]).sum();
        let x = self.point(bary);
        (self.s_a)(&x) * t + (self.s_b)(&x) * (1.0 - t)
    }
}

pub fn interpolate<'a>(
    delta: &[DVector<f64>],
    face_a: &[usize],
    face_b: &[usize],
    s_a: SimplexFn<'a>,
    s_b: SimplexFn<'a>,
) -> Result<Interpolation<'a>> {
    check_opposing(delta.len() - 1, face_a, face_b)?;
    Ok(Interpolation { pts: delta.to_vec(), a: face_a.to_vec(), s_a, s_b })
}

/// Affine map on one simplex given by its vertex images.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexAffineMap {
    pub pts: Vec<DVector<f64>>,
    pub images: Vec<DVector<f64>>,
}

impl SimplexAffineMap {
    pub fn eval_bary(&self, bary: &[f64]) -> DVector<f64> {
        let mut y = DVector::zeros(self.images[0].len());
        for (p, &w) in self.images.iter().zip(bary) {
            y.axpy(w, p, 1.0);
        }
        y
    }

    pub fn jacobian(&self) -> DMatrix<f64> {
        let d: Vec<&DVector<f64>> = self.pts.iter().collect();
        let i: Vec<&DVector<f64>> = self.images.iter().collect();
        simplex_affine_jacobian(&d, &i, self.images[0].len())
    }
}

/// The unique affine map on `Δ` restricting to `s_a` on `A` and `s_b` on `B`
/// (both read off at the face vertices).
pub fn join_map(delta: &[DVector<f64>], face_a: &[usize], face_b: &[usize], s_a: SimplexFn, s_b: SimplexFn) -> Result<SimplexAffineMap> {
    check_opposing(delta.len() - 1, face_a, face_b)?;
    let mut images = vec![DVector::zeros(0); delta.len()];
    for &i in face_a {
        images[i] = s_a(&delta[i]);
    }
    for &i in face_b {
        images[i] = s_b(&delta[i]);
    }
    Ok(SimplexAffineMap { pts: delta.to_vec(), images })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JigglingVerdict {
    pub pass: bool,
    pub subdivides: bool,
    pub c0: f64,
    pub c1: f64,
}

/// `K′` subdivides `K` (vertex positions agree with their recorded parent
/// combinations and children tile every parent simplex) and `d_C¹(f, g) < ε`.
pub fn verify_jiggling(f: &dyn DomainMap, g: &dyn DomainMap, sub: &SubdivisionMap, eps: f64) -> Result<JigglingVerdict> {
    let k = f.domain();
    let kp = g.domain();
    let mut subdivides = sub.parent_vertices == k.num_vertices() && sub.child_vertices() == kp.num_vertices();
    if subdivides {
        let scale = k.vertices().iter().map(|p| p.amax()).fold(1.0, f64::max);
        subdivides = (0..kp.num_vertices()).all(|v| (sub.realize(k, v) - kp.vertex(v)).amax() <= 1e-12 * scale)
            && (0..kp.num_vertices()).all(|v| {
                let c = sub.vertex_carrier(v);
                k.contains(&c)
            })
            && sub.check_volumes(k, kp, 1e-9).is_ok();
    }
    if !subdivides {
        return Ok(JigglingVerdict { pass: false, subdivides, c0: f64::NAN, c1: f64::NAN });
    }
    let d = distances(f, g, Some(sub))?;
    Ok(JigglingVerdict { pass: d.c1 < eps, subdivides, c0: d.c0, c1: d.c1 })
}

/// Every image simplex non-degenerate (relative `rtol`) and images of
/// maximal simplices meeting only along images of shared faces.
pub fn is_piecewise_embedding(f: &PLMap, rtol: f64) -> bool {
    let k = &f.domain;
    for s in k.maximal() {
        if s.len() > f.target_dim + 1 {
            return false;
        }
        if s.len() > 1 {
            let st = shape_of_points(&f.image_points(s));
            if !(st.rmin >= rtol * st.rmax) || st.rmax == 0.0 {
                return false;
            }
        }
    }
    let cells: Vec<Vec<&DVector<f64>>> = k.maximal().iter().map(|s| f.image_points(s)).collect();
    first_bad_pair(k.maximal(), &cells).is_none()
}

//! Linear planes in `R^n`, their projectors and the projection metric.

use nalgebra::{DMatrix, DVector};

use crate::error::{JiggleError, Result};
use crate::linalg::{self, columns, numerical_rank, op_norm, orthonormal_columns, RANK_RTOL};

/// Smallest singular value of `B_Vᵀ B_W` for `W` to count as a graph over `V`.
pub const CHART_TOL: f64 = 1e-9;

/// A `k`-dimensional linear subspace, stored as an orthonormal basis (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    basis: DMatrix<f64>,
}

impl Plane {
    pub fn from_spanning(vectors: &[DVector<f64>], ambient_dim: usize, rtol: f64) -> Result<Plane> {
        if let Some(v) = vectors.iter().find(|v| v.len() != ambient_dim) {
            return Err(JiggleError::AmbientMismatch(v.len(), ambient_dim));
        }
        let m = columns(vectors, ambient_dim);
        orthonormal_columns(&m, rtol).map(|basis| Plane { basis }).ok_or(JiggleError::RankDeficient)
    }

    /// Wraps columns that are already orthonormal.
    pub fn from_orthonormal(basis: DMatrix<f64>) -> Plane {
        debug_assert!({
            let g = basis.transpose() * &basis;
            (g - DMatrix::identity(basis.ncols(), basis.ncols())).amax() < 1e-8
        });
        Plane { basis }
    }

    pub fn zero(ambient_dim: usize) -> Plane {
        Plane { basis: DMatrix::zeros(ambient_dim, 0) }
    }

    pub fn coordinate(ambient_dim: usize, axes: &[usize]) -> Plane {
        let mut basis = DMatrix::zeros(ambient_dim, axes.len());
        for (j, &a) in axes.iter().enumerate() {
            basis[(a, j)] = 1.0;
        }
        Plane { basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<DVector<f64>> {
        self.basis.column_iter().map(|c| c.clone_owned()).collect()
    }

    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.basis * (self.basis.transpose() * v)
    }

    /// Orthogonal complement. Its basis is built greedily from the standard
    /// basis (largest residual first, lowest index on ties), so coordinates
    /// along coordinate planes come out as plain coordinates.
    pub fn complement(&self) -> Plane {
        let n = self.ambient_dim();
        let mut q: Vec<DVector<f64>> = self.basis_vectors();
        let mut out: Vec<DVector<f64>> = Vec::new();
        while q.len() < n {
            let mut best: Option<(f64, DVector<f64>)> = None;
            for i in 0..n {
                let mut r = DVector::zeros(n);
                r[i] = 1.0;
                for _ in 0..2 {
                    for b in &q {
                        let d = b.dot(&r);
                        r.axpy(-d, b, 1.0);
                    }
                }
                let nr = r.norm();
                if best.as_ref().is_none_or(|(bn, _)| nr > *bn + 1e-12) {
                    best = Some((nr, r));
                }
            }
            let (nr, r) = best.expect("ambient dimension is positive");
            let u = r / nr;
            q.push(u.clone());
            out.push(u);
        }
        Plane { basis: columns(&out, n) }
    }

    pub fn check_same_ambient(&self, other: &Plane) -> Result<()> {
        if self.ambient_dim() == other.ambient_dim() {
            Ok(())
        } else {
            Err(JiggleError::AmbientMismatch(self.ambient_dim(), other.ambient_dim()))
        }
    }

    /// Sum of two planes.
    pub fn span_with(&self, other: &Plane) -> Result<Plane> {
        self.check_same_ambient(other)?;
        let mut vs = self.basis_vectors();
        vs.extend(other.basis_vectors());
        let m = columns(&vs, self.ambient_dim());
        let r = numerical_rank(&m, RANK_RTOL);
        if m.ncols() == 0 || r == 0 {
            return Ok(Plane::zero(self.ambient_dim()));
        }
        let svd = m.svd(true, false);
        let u = svd.u.expect("requested U");
        let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
        idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let cols: Vec<DVector<f64>> = idx[..r].iter().map(|&i| u.column(i).clone_owned()).collect();
        Ok(Plane { basis: columns(&cols, self.ambient_dim()) })
    }
}

/// Orthonormal basis of the span of `vectors`.
pub fn plane_from_spanning(vectors: &[DVector<f64>], rtol: f64) -> Result<Plane> {
    let n = vectors.first().map(|v| v.len()).ok_or(JiggleError::RankDeficient)?;
    Plane::from_spanning(vectors, n, rtol)
}

/// `dim(V + W) = min(v + w, n)` at the relative rank tolerance.
pub fn is_transverse_planes(v: &Plane, w: &Plane, rtol: f64) -> Result<bool> {
    v.check_same_ambient(w)?;
    let n = v.ambient_dim();
    let mut cols = v.basis_vectors();
    cols.extend(w.basis_vectors());
    let r = numerical_rank(&columns(&cols, n), rtol);
    Ok(r == (v.dim() + w.dim()).min(n))
}

/// Operator norm of the difference of the orthogonal projectors.
pub fn d_proj(v: &Plane, w: &Plane) -> Result<f64> {
    v.check_same_ambient(w)?;
    Ok(op_norm(&(v.projector() - w.projector())))
}

/// Graph representation of `w` over `center`: the matrix of `T : V → V⊥`
/// (in the bases of `center` and its complement) with `w = graph(T)`.
pub fn chart_coordinates(center: &Plane, perp: &Plane, w: &Plane) -> Result<DMatrix<f64>> {
    center.check_same_ambient(w)?;
    if center.dim() != w.dim() {
        return Err(JiggleError::PreconditionViolated("chart needs planes of equal rank".into()));
    }
    let a = center.basis().transpose() * w.basis();
    if linalg::min_singular(&a) < CHART_TOL {
        return Err(JiggleError::OutsideChart);
    }
    let c = perp.basis().transpose() * w.basis();
    let a_inv = a.try_inverse().ok_or(JiggleError::OutsideChart)?;
    Ok(c * a_inv)
}

/// Distance between `w1` and `w2` in the graph chart centered at `center`.
pub fn chart_metric(center: &Plane, w1: &Plane, w2: &Plane) -> Result<f64> {
    let perp = center.complement();
    let t1 = chart_coordinates(center, &perp, w1)?;
    let t2 = chart_coordinates(center, &perp, w2)?;
    Ok(op_norm(&(t1 - t2)))
}

/// Coordinates of `p` in `V⊥` (the quotient `R^n / V`), using the basis of
/// `V.complement()`.
pub fn project_along(v: &Plane, p: &DVector<f64>) -> DVector<f64> {
    v.complement().basis().transpose() * p
}

/// Projection along `v` with a precomputed complement.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub plane: Plane,
    pub perp: Plane,
}

impl Quotient {
    pub fn new(plane: &Plane) -> Self {
        Quotient { plane: plane.clone(), perp: plane.complement() }
    }

    pub fn dim(&self) -> usize {
        self.perp.dim()
    }

    pub fn apply(&self, p: &DVector<f64>) -> DVector<f64> {
        self.perp.basis().transpose() * p
    }
}

/// `base + direction`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFlat {
    pub base: DVector<f64>,
    pub direction: Plane,
}

impl AffineFlat {
    pub fn new(base: DVector<f64>, direction: Plane) -> Self {
        AffineFlat { base, direction }
    }

    /// Affine span of points, with the rank tolerance deciding the dimension.
    pub fn through(points: &[&DVector<f64>]) -> AffineFlat {
        let n = points[0].len();
        let dirs: Vec<DVector<f64>> = points[1..].iter().map(|p| *p - points[0]).collect();
        let direction = if dirs.is_empty() {
            Plane::zero(n)
        } else {
            let m = columns(&dirs, n);
            let r = numerical_rank(&m, RANK_RTOL);
            if r == 0 {
                Plane::zero(n)
            } else {
                let svd = m.svd(true, false);
                let u = svd.u.expect("requested U");
                let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
                idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
                let cols: Vec<DVector<f64>> = idx[..r].iter().map(|&i| u.column(i).clone_owned()).collect();
                Plane::from_orthonormal(columns(&cols, n))
            }
        };
        AffineFlat { base: points[0].clone(), direction }
    }

    pub fn dim(&self) -> usize {
        self.direction.dim()
    }

    pub fn distance(&self, p: &DVector<f64>) -> f64 {
        linalg::residual(&(p - &self.base), self.direction.basis()).norm()
    }

    pub fn closest_point(&self, p: &DVector<f64>) -> DVector<f64> {
        &self.base + self.direction.project(&(p - &self.base))
    }
}

pub fn point_flat_distance(p: &DVector<f64>, flat: &AffineFlat) -> f64 {
    flat.distance(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn line(theta: f64) -> Plane {
        plane_from_spanning(&[v(&[theta.cos(), theta.sin()])], RANK_RTOL).unwrap()
    }

    #[test]
    fn spanning_examples() {
        let p = plane_from_spanning(&[v(&[1.0, 1.0, 0.0]), v(&[1.0, -1.0, 0.0])], RANK_RTOL).unwrap();
        let q = Plane::coordinate(3, &[0, 1]);
        assert!((p.projector() - q.projector()).amax() < 1e-14);
        assert_eq!(plane_from_spanning(&[v(&[1.0, 0.0]), v(&[2.0, 0.0])], RANK_RTOL), Err(JiggleError::RankDeficient));
        assert_eq!(plane_from_spanning(&[v(&[1.0, 0.0])], RANK_RTOL).unwrap().dim(), 1);
    }

    #[test]
    fn transversality_examples() {
        let e = |axes: &[usize], n| Plane::coordinate(n, axes);
        assert!(is_transverse_planes(&e(&[0], 3), &e(&[1], 3), RANK_RTOL).unwrap());
        assert!(!is_transverse_planes(&e(&[0], 2), &e(&[0], 2), RANK_RTOL).unwrap());
        assert!(is_transverse_planes(&e(&[0, 1], 3), &e(&[1, 2], 3), RANK_RTOL).unwrap());
        assert!(is_transverse_planes(&e(&[0], 2), &e(&[0], 3), RANK_RTOL).is_err());
    }

    #[test]
    fn d_proj_lines() {
        assert_eq!(d_proj(&line(0.3), &line(0.3)).unwrap(), 0.0);
        assert!((d_proj(&line(0.0), &line(std::f64::consts::FRAC_PI_2)).unwrap() - 1.0).abs() < 1e-14);
        let d = d_proj(&line(0.0), &line(std::f64::consts::FRAC_PI_4)).unwrap();
        assert!((d - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn chart_examples() {
        let c = Plane::coordinate(2, &[0]);
        assert_eq!(chart_metric(&c, &c, &c).unwrap(), 0.0);
        let w = line(30f64.to_radians());
        assert!((chart_metric(&c, &c, &w).unwrap() - 30f64.to_radians().tan()).abs() < 1e-14);
        assert_eq!(chart_metric(&c, &c, &Plane::coordinate(2, &[1])), Err(JiggleError::OutsideChart));
    }

    #[test]
    fn projection_examples() {
        let e1 = Plane::coordinate(2, &[0]);
        assert_eq!(project_along(&e1, &v(&[5.0, 3.0])), v(&[3.0]));
        let e1 = Plane::coordinate(3, &[0]);
        assert_eq!(project_along(&e1, &v(&[1.0, 2.0, 2.0])), v(&[2.0, 2.0]));
    }

    #[test]
    fn flat_distances() {
        let x_axis = AffineFlat::new(v(&[0.0, 0.0]), Plane::coordinate(2, &[0]));
        assert_eq!(point_flat_distance(&v(&[0.0, 1.0]), &x_axis), 1.0);
        assert_eq!(point_flat_distance(&v(&[7.0, 0.0]), &x_axis), 0.0);
        let e1 = AffineFlat::new(v(&[0.0, 0.0, 0.0]), Plane::coordinate(3, &[0]));
        assert!((point_flat_distance(&v(&[1.0, 1.0, 1.0]), &e1) - 2f64.sqrt()).abs() < 1e-15);
    }
}

//! Small dense helpers shared by the geometry modules.

use nalgebra::{DMatrix, DVector};

/// Singular values below this fraction of the largest one count as zero.
pub const RANK_RTOL: f64 = 1e-9;

pub fn columns(cols: &[DVector<f64>], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

/// Singular values in descending order. Empty matrices have none.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn numerical_rank(m: &DMatrix<f64>, rtol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        None => 0,
        Some(&top) if top <= 0.0 => 0,
        Some(&top) => s.iter().filter(|&&v| v > rtol * top).count(),
    }
}

pub fn op_norm(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn min_singular(m: &DMatrix<f64>) -> f64 {
    if m.ncols() == 0 {
        return f64::INFINITY;
    }
    if m.nrows() < m.ncols() {
        return 0.0;
    }
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Orthonormal basis (as columns) of the column span of `m`, or `None` when
/// the columns are dependent at the relative tolerance.
pub fn orthonormal_columns(m: &DMatrix<f64>, rtol: f64) -> Option<DMatrix<f64>> {
    let k = m.ncols();
    if k == 0 {
        return Some(DMatrix::zeros(m.nrows(), 0));
    }
    if k > m.nrows() {
        return None;
    }
    let scale = m.column_iter().fold(0.0f64, |a, c| a.max(c.norm()));
    if scale == 0.0 {
        return None;
    }
    // Modified Gram-Schmidt twice; the rank test below catches dependence.
    let mut q = m.clone();
    for _ in 0..2 {
        for j in 0..k {
            for i in 0..j {
                let qi = q.column(i).clone_owned();
                let d = qi.dot(&q.column(j));
                let mut cj = q.column_mut(j);
                cj.axpy(-d, &qi, 1.0);
            }
            let nrm = q.column(j).norm();
            if nrm <= rtol * scale {
                return None;
            }
            q.column_mut(j).scale_mut(1.0 / nrm);
        }
    }
    let s = singular_values(m);
    if s.last().copied().unwrap_or(0.0) <= rtol * s[0] {
        return None;
    }
    Some(q)
}

/// Orthogonal residual of `v` against the span of orthonormal columns `q`.
pub fn residual(v: &DVector<f64>, q: &DMatrix<f64>) -> DVector<f64> {
    if q.ncols() == 0 {
        return v.clone();
    }
    v - q * (q.transpose() * v)
}

/// Moore-Penrose pseudo-inverse with the shared rank tolerance.
pub fn pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let svd = m.clone().svd(true, true);
    let top = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    svd.pseudo_inverse(RANK_RTOL * top).unwrap_or_else(|_| DMatrix::zeros(m.ncols(), m.nrows()))
}

/// Distance from `p` to the affine span of `pts`.
pub fn dist_to_affine_span(p: &DVector<f64>, pts: &[&DVector<f64>]) -> f64 {
    let base = pts[0];
    let dirs: Vec<DVector<f64>> = pts[1..].iter().map(|q| *q - base).collect();
    let d = p - base;
    if dirs.is_empty() {
        return d.norm();
    }
    let a = columns(&dirs, p.len());
    let coef = pinv(&a) * &d;
    (d - a * coef).norm()
}

/// m-dimensional volume of the simplex spanned by `pts` (m + 1 points).
pub fn simplex_volume(pts: &[&DVector<f64>]) -> f64 {
    let m = pts.len() - 1;
    if m == 0 {
        return 1.0;
    }
    let dirs: Vec<DVector<f64>> = pts[1..].iter().map(|q| *q - pts[0]).collect();
    let a = columns(&dirs, pts[0].len());
    let g = a.transpose() * &a;
    let det = g.determinant().max(0.0);
    let fact: f64 = (1..=m).map(|i| i as f64).product();
    det.sqrt() / fact
}

pub fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

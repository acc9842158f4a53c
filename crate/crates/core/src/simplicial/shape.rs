use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::linalg::{columns, dist_to_affine_span, pinv};

/// Relative degeneracy threshold: degenerate when `rmin < DEGENERACY_RTOL * rmax`.
pub const DEGENERACY_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeStats {
    pub rmin: f64,
    pub rmax: f64,
    pub lambda: f64,
}

impl ShapeStats {
    /// Single points are never degenerate.
    pub fn is_degenerate(&self) -> bool {
        self.lambda.is_infinite()
    }
}

/// Shape statistics of the simplex spanned by `pts`.
///
/// `lambda` is the largest coefficient `|λ_i|` over combinations
/// `Σ λ_i (v_i - v_0)` of unit length, which is the largest row norm of the
/// pseudo-inverse of the edge matrix. A single point gets all zeros.
pub fn shape_of_points(pts: &[&DVector<f64>]) -> ShapeStats {
    let m = pts.len().saturating_sub(1);
    if m == 0 {
        return ShapeStats { rmin: 0.0, rmax: 0.0, lambda: 0.0 };
    }
    let mut rmax = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            rmax = rmax.max((pts[i] - pts[j]).norm());
        }
    }
    let mut rmin = f64::INFINITY;
    for i in 0..pts.len() {
        let others: Vec<&DVector<f64>> = pts.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, p)| *p).collect();
        rmin = rmin.min(dist_to_affine_span(pts[i], &others));
    }
    let edges: Vec<DVector<f64>> = pts[1..].iter().map(|p| *p - pts[0]).collect();
    let a = columns(&edges, pts[0].len());
    let lambda = if !(rmin >= DEGENERACY_RTOL * rmax) || rmax == 0.0 {
        f64::INFINITY
    } else {
        let p = pinv(&a);
        p.row_iter().map(|r| r.norm()).fold(0.0, f64::max)
    };
    ShapeStats { rmin, rmax, lambda }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn right_triangle() {
        let (a, b, c) = (v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0]));
        let s = shape_of_points(&[&a, &b, &c]);
        assert!((s.rmax - 2f64.sqrt()).abs() < 1e-14);
        assert!((s.rmin - 1.0 / 2f64.sqrt()).abs() < 1e-14);
        assert!((s.lambda - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thin_triangle_lambda() {
        let e = 0.1;
        let (a, b, c) = (v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[1.0, e]));
        let s = shape_of_points(&[&a, &b, &c]);
        // max{|v1|,|v2|} / sqrt(|v1|^2 |v2|^2 - <v1,v2>^2)
        let v1 = (1.0f64, 0.0f64);
        let v2 = (1.0f64, e);
        let n1 = (v1.0 * v1.0 + v1.1 * v1.1).sqrt();
        let n2 = (v2.0 * v2.0 + v2.1 * v2.1).sqrt();
        let dot = v1.0 * v2.0 + v1.1 * v2.1;
        let footnote = n1.max(n2) / (n1 * n1 * n2 * n2 - dot * dot).sqrt();
        assert!((s.lambda - footnote).abs() < 1e-10);
        assert!((s.lambda - 10.04987562112089).abs() < 1e-10);
    }

    #[test]
    fn edge_in_space() {
        let (a, b) = (v(&[1.0, 1.0, 1.0]), v(&[1.0, 1.0, 3.0]));
        let s = shape_of_points(&[&a, &b]);
        assert_eq!(s.rmin, 2.0);
        assert_eq!(s.rmax, 2.0);
        assert!((s.lambda - 0.5).abs() < 1e-15);
    }

    #[test]
    fn collinear_is_degenerate() {
        let (a, b, c) = (v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[2.0, 0.0]));
        assert!(shape_of_points(&[&a, &b, &c]).is_degenerate());
    }
}

//! Ordered simplicial complexes in Euclidean space and their subdivisions.

pub mod adjacency;
pub mod complex;
pub mod model;
pub mod nice;
pub mod shape;
pub mod subdivision;

pub use adjacency::{Adjacency, AdjacencyKind, Subcomplex};
pub use complex::{Simplex, SimplicialComplex};
pub use model::{model_classes, ModelClasses};
pub use nice::is_nice;
pub use shape::{shape_of_points, ShapeStats};
pub use subdivision::{barycentric_subdivide, crystalline_subdivide, SubdivisionMap};

use crate::error::{JiggleError, Result};

/// Standard simplex `⟨0, e_1, …, e_m⟩` in `R^m`.
pub fn standard_simplex(m: usize) -> SimplicialComplex {
    let mut coords = vec![vec![0.0; m]];
    for i in 0..m {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        coords.push(e);
    }
    SimplicialComplex::build(m.max(1), pad(coords, m.max(1)), vec![(0..=m).collect()]).expect("standard simplex")
}

fn pad(coords: Vec<Vec<f64>>, n: usize) -> Vec<Vec<f64>> {
    coords.into_iter().map(|mut c| {
        c.resize(n, 0.0);
        c
    }).collect()
}

/// Shape statistics of a simplex of `k`.
pub fn shape_stats(k: &SimplicialComplex, s: &[usize]) -> Result<ShapeStats> {
    if !k.contains(s) {
        return Err(JiggleError::QueryNotInComplex);
    }
    let st = k.shape(s);
    if st.is_degenerate() {
        return Err(JiggleError::DegenerateSimplex(s.to_vec()));
    }
    Ok(st)
}

use std::collections::BTreeMap;

use super::complex::SimplicialComplex;
use super::subdivision::crystalline_subdivide;

/// Canonical form of a simplex up to translation: vertices sorted
/// lexicographically, relative to the smallest, quantized to 1e-8.
pub type ModelKey = Vec<Vec<i64>>;

const QUANTUM: f64 = 1e8;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelClasses {
    /// Class representative key and the number of top simplices in it.
    pub classes: BTreeMap<ModelKey, usize>,
    /// For each top simplex of `K_ℓ` (in `top_simplices()` order), its class
    /// index into `classes`.
    pub assignment: Vec<usize>,
}

impl ModelClasses {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn keys(&self) -> Vec<&ModelKey> {
        self.classes.keys().collect()
    }
}

pub fn model_key(pts: &[&nalgebra::DVector<f64>], scale: f64) -> ModelKey {
    let mut q: Vec<Vec<i64>> =
        pts.iter().map(|p| p.iter().map(|x| (x * scale * QUANTUM).round() as i64).collect()).collect();
    q.sort();
    let base = q[0].clone();
    for row in q.iter_mut() {
        for (x, b) in row.iter_mut().zip(&base) {
            *x -= b;
        }
    }
    q
}

/// Shape classes of the top simplices of `K_ℓ` after rescaling by `2^ℓ`.
pub fn model_classes(k: &SimplicialComplex, level: u32) -> ModelClasses {
    let (kl, _) = crystalline_subdivide(k, level);
    let scale = (1u64 << level) as f64;
    let keys: Vec<ModelKey> = kl.top_simplices().iter().map(|s| model_key(&kl.points(s), scale)).collect();
    let mut classes: BTreeMap<ModelKey, usize> = BTreeMap::new();
    for key in &keys {
        *classes.entry(key.clone()).or_insert(0) += 1;
    }
    let index: BTreeMap<&ModelKey, usize> = classes.keys().enumerate().map(|(i, k)| (k, i)).collect();
    let assignment = keys.iter().map(|k| index[k]).collect();
    ModelClasses { classes, assignment }
}

use std::sync::Arc;

use jigglekit::io::scenarios::unit_square_grid;
use jigglekit::pl_maps::{
    barycentric_lattice, distances, is_piecewise_embedding, linearize, verify_jiggling, PLMap, SampledMap,
};
use jigglekit::simplicial::{crystalline_subdivide, standard_simplex, SubdivisionMap};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn lattice_has_all_weight_vectors() {
    for m in 0..4 {
        for depth in 1..5 {
            let pts = barycentric_lattice(m, depth);
            assert_eq!(pts.len(), binomial(depth + m, m));
            for w in &pts {
                assert_eq!(w.len(), m + 1);
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(w.iter().all(|&x| x >= 0.0));
            }
        }
    }
}

fn affine_map(a: DMatrix<f64>, b: DVector<f64>) -> SampledMap {
    let k = unit_square_grid(2).unwrap();
    let (a1, b1, a2) = (a.clone(), b.clone(), a.clone());
    SampledMap::new(k, a.nrows(), Arc::new(move |x| &a1 * x + &b1), Some(Arc::new(move |_| a2.clone())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // Linearization reproduces affine maps exactly at every level.
    #[test]
    fn linearization_of_affine_map_is_exact(entries in prop::collection::vec(-2.0..2.0f64, 6), b in prop::collection::vec(-1.0..1.0f64, 3), level in 0u32..4) {
        let a = DMatrix::from_row_slice(3, 2, &entries);
        let f = affine_map(a, DVector::from_column_slice(&b));
        let (lin, sub) = linearize(&f, level);
        let d = distances(&f, &lin, Some(&sub)).unwrap();
        prop_assert!(d.c0 < 1e-12);
        prop_assert!(d.c1 < 1e-9);
    }

    #[test]
    fn constant_shift_distances(shift in prop::collection::vec(-1.0..1.0f64, 2)) {
        let k = unit_square_grid(2).unwrap();
        let f = PLMap::identity(&k);
        let s = DVector::from_column_slice(&shift);
        let g = f.with_images(f.images().iter().map(|p| p + &s).collect()).unwrap();
        let d = distances(&f, &g, None).unwrap();
        prop_assert!((d.c0 - s.norm()).abs() < 1e-12);
        prop_assert!((d.c1 - s.norm()).abs() < 1e-12);
    }

    #[test]
    fn distances_are_symmetric(moves in prop::collection::vec(-0.05..0.05f64, 18)) {
        let k = unit_square_grid(2).unwrap();
        let f = PLMap::identity(&k);
        let g = f.with_images(f.images().iter().enumerate().map(|(i, p)| {
            p + DVector::from_column_slice(&moves[2 * i..2 * i + 2])
        }).collect()).unwrap();
        let a = distances(&f, &g, None).unwrap();
        let b = distances(&g, &f, None).unwrap();
        prop_assert!((a.c0 - b.c0).abs() < 1e-12);
        prop_assert!((a.c1 - b.c1).abs() < 1e-12);
        // A vertex move of size t changes the map by at least t.
        let biggest = moves.chunks(2).map(|c| (c[0] * c[0] + c[1] * c[1]).sqrt()).fold(0.0, f64::max);
        prop_assert!(a.c0 >= biggest - 1e-12);
    }
}

#[test]
fn identity_against_its_subdivision_passes_verification() {
    let k = standard_simplex(2);
    let f = PLMap::identity(&k);
    let (k2, sub) = crystalline_subdivide(&k, 2);
    let g = PLMap::identity(&k2);
    let v = verify_jiggling(&f, &g, &sub, 1e-6).unwrap();
    assert!(v.pass && v.subdivides);
    assert!(v.c1 < 1e-12);
}

#[test]
fn misplaced_vertex_is_not_a_subdivision() {
    let k = standard_simplex(2);
    let f = PLMap::identity(&k);
    let (k2, sub) = crystalline_subdivide(&k, 1);
    let mut weights = sub.weights.clone();
    let moved = weights.iter().position(|w| w.len() == 2).unwrap();
    weights[moved] = vec![(weights[moved][0].0, 0.3), (weights[moved][1].0, 0.7)];
    let bad = SubdivisionMap { parent_vertices: sub.parent_vertices, weights };
    let v = verify_jiggling(&f, &PLMap::identity(&k2), &bad, 1.0).unwrap();
    assert!(!v.subdivides && !v.pass);
}

#[test]
fn folding_a_vertex_breaks_the_embedding() {
    let k = unit_square_grid(2).unwrap();
    let f = PLMap::identity(&k);
    assert!(is_piecewise_embedding(&f, 1e-12));
    // Push the center vertex across the opposite corner.
    let center = (0..k.num_vertices()).find(|&v| (k.vertex(v) - DVector::from_column_slice(&[0.5, 0.5])).norm() < 1e-12).unwrap();
    let mut images = f.images().to_vec();
    images[center] = DVector::from_column_slice(&[1.4, 1.3]);
    assert!(!is_piecewise_embedding(&f.with_images(images).unwrap(), 1e-12));
    // A small move keeps it embedded.
    let mut images = f.images().to_vec();
    images[center] += DVector::from_column_slice(&[0.05, -0.03]);
    assert!(is_piecewise_embedding(&f.with_images(images).unwrap(), 1e-12));
}

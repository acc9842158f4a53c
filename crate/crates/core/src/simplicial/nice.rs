use super::adjacency::Subcomplex;
use super::complex::{Simplex, SimplicialComplex};
use crate::error::Result;

/// True iff every simplex of `star(sub)` meets `sub` in a single face.
///
/// It is enough to look at maximal simplices: a face of `Δ` meets `sub` in
/// its intersection with `Δ ∩ sub`, which is again a face.
pub fn is_nice(k: &SimplicialComplex, sub: &Subcomplex) -> Result<bool> {
    let star = k.star(sub)?;
    for s in star.maximal() {
        let inside: Simplex = s.iter().copied().filter(|v| sub.contains(&[*v])).collect();
        if !inside.is_empty() && !sub.contains(&inside) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplicial::{barycentric_subdivide, standard_simplex};

    fn two_triangles() -> SimplicialComplex {
        SimplicialComplex::build(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
            vec![vec![0, 1, 2], vec![1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn two_edges_of_a_triangle_are_not_nice() {
        let k = two_triangles();
        let bent = Subcomplex::closure_of([vec![0, 1], vec![0, 2]]);
        assert!(!is_nice(&k, &bent).unwrap());
        let single = Subcomplex::closure_of([vec![1, 2]]);
        assert!(is_nice(&k, &single).unwrap());
    }

    #[test]
    fn trivial_cases() {
        let k = standard_simplex(3);
        assert!(is_nice(&k, &Subcomplex::default()).unwrap());
        for v in 0..4 {
            assert!(is_nice(&k, &Subcomplex::vertex(v)).unwrap());
        }
    }

    #[test]
    fn barycentric_makes_subcomplex_nice() {
        let k = two_triangles();
        let (b, map) = barycentric_subdivide(&k);
        let a = Subcomplex::closure_of([vec![0, 1], vec![0, 2]]);
        let sub = Subcomplex::closure_of(b.all_simplices().filter(|s| a.contains(&map.carrier(s))).cloned());
        assert!(is_nice(&b, &sub).unwrap());
    }
}

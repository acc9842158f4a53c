//! Builtin complexes and scenarios.

use crate::error::{JiggleError, Result};
use crate::grassmannian::Plane;
use crate::simplicial::{standard_simplex, SimplicialComplex, Subcomplex, SubdivisionMap};

/// `[0,1]²` cut into `n × n` squares, each split along its `(1,1)` diagonal.
/// Vertex `(i, j)` has index `j(n+1) + i`.
pub fn unit_square_grid(n: usize) -> Result<SimplicialComplex> {
    if n == 0 {
        return Err(JiggleError::Malformed("grid size must be positive".into()));
    }
    let h = 1.0 / n as f64;
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut coords = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            coords.push(vec![i as f64 * h, j as f64 * h]);
        }
    }
    let mut tris = Vec::new();
    for j in 0..n {
        for i in 0..n {
            tris.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push(vec![id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
        }
    }
    SimplicialComplex::build(2, coords, tris)
}

/// `[0,n] × [0,1]` cut into unit squares with alternating diagonals; square 0
/// uses the anti-diagonal. Vertices `(i,0)` and `(i,1)` have indices `2i` and
/// `2i+1`.
pub fn strip(n: usize) -> Result<SimplicialComplex> {
    if n == 0 {
        return Err(JiggleError::Malformed("strip length must be positive".into()));
    }
    let mut coords = Vec::new();
    for i in 0..=n {
        coords.push(vec![i as f64, 0.0]);
        coords.push(vec![i as f64, 1.0]);
    }
    let mut tris = Vec::new();
    for i in 0..n {
        let (a, b, c, d) = (2 * i, 2 * i + 1, 2 * i + 2, 2 * i + 3);
        if i % 2 == 0 {
            tris.push(vec![a, b, c]);
            tris.push(vec![b, c, d]);
        } else {
            tris.push(vec![a, c, d]);
            tris.push(vec![a, b, d]);
        }
    }
    SimplicialComplex::build(2, coords, tris)
}

/// `[0,1]³` cut into `n³` cubes, each split into the six Kuhn tetrahedra.
pub fn unit_box(n: usize) -> Result<SimplicialComplex> {
    if n == 0 {
        return Err(JiggleError::Malformed("box size must be positive".into()));
    }
    let h = 1.0 / n as f64;
    let s = n + 1;
    let id = |p: [usize; 3]| p[0] + s * (p[1] + s * p[2]);
    let mut coords = Vec::new();
    for z in 0..s {
        for y in 0..s {
            for x in 0..s {
                coords.push(vec![x as f64 * h, y as f64 * h, z as f64 * h]);
            }
        }
    }
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut tets = Vec::new();
    for z in 0..n {
        for y in 0..n {
            for x in 0..n {
                for p in &perms {
                    let mut c = [x, y, z];
                    let mut t = vec![id(c)];
                    for &axis in p {
                        c[axis] += 1;
                        t.push(id(c));
                    }
                    tets.push(t);
                }
            }
        }
    }
    SimplicialComplex::build(3, coords, tets)
}

/// The triangle `K` on `(0,0), (2,1), (1,3)` and its
/// subdivision `K′` through `d = (1/3, 1)` on the edge from `(1,3)` to the
/// origin. The new edge from `d` to `(2,1)` is horizontal.
pub fn refined_triangle() -> (SimplicialComplex, SimplicialComplex, SubdivisionMap) {
    let k = SimplicialComplex::build(2, vec![vec![0.0, 0.0], vec![2.0, 1.0], vec![1.0, 3.0]], vec![vec![0, 1, 2]])
        .expect("refined_triangle triangle");
    let k2 = SimplicialComplex::build(
        2,
        vec![vec![0.0, 0.0], vec![2.0, 1.0], vec![1.0, 3.0], vec![1.0 / 3.0, 1.0]],
        vec![vec![0, 1, 3], vec![1, 2, 3]],
    )
    .expect("refined_triangle subdivision");
    let sub = SubdivisionMap {
        parent_vertices: 3,
        weights: vec![vec![(0, 1.0)], vec![(1, 1.0)], vec![(2, 1.0)], vec![(0, 2.0 / 3.0), (2, 1.0 / 3.0)]],
    };
    (k, k2, sub)
}

pub fn horizontal_line_field() -> Plane {
    Plane::coordinate(2, &[0])
}

/// Left edge of [`strip`].
pub fn strip_left_edge() -> Subcomplex {
    Subcomplex::closure_of([vec![0, 1]])
}

/// Right edge of [`strip`].
pub fn strip_right_edge(n: usize) -> Subcomplex {
    Subcomplex::closure_of([vec![2 * n, 2 * n + 1]])
}

fn parse_arg(name: &str, prefix: &str) -> Option<Result<usize>> {
    let rest = name.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
    Some(rest.trim().parse::<usize>().map_err(|_| JiggleError::Malformed(format!("bad argument in `{name}`"))))
}

/// Builtin complexes by name: `unit_square_grid(n)`, `standard_simplex(m)`,
/// `strip(n)`, `box(n)` and `refined_triangle` (the subdivided triangle).
pub fn builtin_complex(name: &str) -> Result<SimplicialComplex> {
    let name = name.trim();
    if let Some(n) = parse_arg(name, "unit_square_grid") {
        return unit_square_grid(n?);
    }
    if let Some(m) = parse_arg(name, "standard_simplex") {
        let m = m?;
        if !(1..=6).contains(&m) {
            return Err(JiggleError::Malformed(format!("standard_simplex dimension {m} out of range 1..=6")));
        }
        return Ok(standard_simplex(m));
    }
    if let Some(n) = parse_arg(name, "strip") {
        return strip(n?);
    }
    if let Some(n) = parse_arg(name, "box") {
        return unit_box(n?);
    }
    if name == "refined_triangle" {
        return Ok(refined_triangle().1);
    }
    Err(JiggleError::UnknownName { kind: "complex", name: name.into() })
}

use super::formats::{ComplexFile, ComplexRef, RefinementSpec, RelativeSpec, ScenarioFile, SCHEMA_VERSION};
use crate::engine::JigglingConfig;
use crate::transversality::DistributionSpec;

fn constant(basis: Vec<Vec<f64>>) -> DistributionSpec {
    DistributionSpec::Constant { basis }
}

fn scenario(complex: ComplexRef, distribution: DistributionSpec, config: JigglingConfig) -> ScenarioFile {
    ScenarioFile {
        schema_version: SCHEMA_VERSION,
        complex,
        images: None,
        distribution,
        config,
        mode: None,
        levels: None,
        refinement: None,
        relative: None,
    }
}

/// The eight-triangle unit square grid against the horizontal line field.
pub fn grid_scenario() -> ScenarioFile {
    let mut s = scenario(
        ComplexRef::Builtin("unit_square_grid(2)".into()),
        constant(vec![vec![1.0, 0.0]]),
        JigglingConfig { gamma: 0.2, level: Some(2), seed: 7, ..Default::default() },
    );
    s.mode = Some("euclidean".into());
    s
}

/// The subdivided triangle against the horizontal line field.
pub fn refined_triangle_scenario() -> ScenarioFile {
    let (k, k2, sub) = refined_triangle();
    let mut s = scenario(
        ComplexRef::Inline(ComplexFile::from_complex(&k)),
        constant(vec![vec![1.0, 0.0]]),
        JigglingConfig { gamma: 0.2, level: Some(1), seed: 11, ..Default::default() },
    );
    s.mode = Some("subdivision".into());
    s.refinement = Some(RefinementSpec { complex: ComplexRef::Inline(ComplexFile::from_complex(&k2)), subdivision: sub });
    s
}

/// Strip of four squares against the `(1,1)` line field, fixing the left
/// edge and the right edge with a neighborhood of radius 1/2.
pub fn strip_scenario() -> ScenarioFile {
    let h = 0.5f64.sqrt();
    let mut s = scenario(
        ComplexRef::Builtin("strip(4)".into()),
        constant(vec![vec![h, h]]),
        JigglingConfig { gamma: 0.2, level: None, seed: 5, ..Default::default() },
    );
    s.mode = Some("relative".into());
    s.relative = Some(RelativeSpec { a: vec![vec![0, 1]], b: vec![vec![8, 9]], radius: 0.5 });
    s
}

/// The 2×2×2 box against `span(e₁)`, or against the planar rotor.
pub fn box_scenario(rotor: bool) -> ScenarioFile {
    let dist = if rotor {
        DistributionSpec::Builtin { name: "planar_rotor(1)".into(), ambient_dim: Some(3) }
    } else {
        constant(vec![vec![1.0, 0.0, 0.0]])
    };
    let mut s = scenario(
        ComplexRef::Builtin("box(2)".into()),
        dist,
        JigglingConfig { gamma: 0.2, level: Some(1), seed: 3, ..Default::default() },
    );
    s.mode = Some("euclidean".into());
    s
}

/// Builtin scenarios: `grid`, `refined_triangle`, `strip`, `box`, `box_rotor` and
/// `grid_tower` (levels 2, 3, 4).
pub fn builtin_scenario(name: &str) -> Result<ScenarioFile> {
    Ok(match name {
        "grid" => grid_scenario(),
        "grid_tower" => {
            let mut s = grid_scenario();
            s.mode = Some("tower".into());
            s.levels = Some(vec![2, 3, 4]);
            s
        }
        "refined_triangle" => refined_triangle_scenario(),
        "strip" => strip_scenario(),
        "box" => box_scenario(false),
        "box_rotor" => box_scenario(true),
        other => return Err(JiggleError::UnknownName { kind: "scenario", name: other.into() }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(unit_square_grid(2).unwrap().top_simplices().len(), 8);
        assert_eq!(strip(4).unwrap().top_simplices().len(), 8);
        let b = unit_box(2).unwrap();
        assert_eq!(b.top_simplices().len(), 48);
        assert!((b.volume(3) - 1.0).abs() < 1e-12);
        assert_eq!(builtin_complex("standard_simplex(2)").unwrap().top_simplices().len(), 1);
        assert!(builtin_complex("torus(3)").is_err());
        assert!(builtin_complex("strip(x)").is_err());
    }

    #[test]
    fn refined_triangle_realizes_positions() {
        let (k, k2, sub) = refined_triangle();
        for v in 0..k2.num_vertices() {
            assert!((sub.realize(&k, v) - k2.vertex(v)).norm() < 1e-15);
        }
        sub.check_volumes(&k, &k2, 1e-12).unwrap();
    }
}

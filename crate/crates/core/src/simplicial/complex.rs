use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DVector;

use crate::error::{JiggleError, Result};
use crate::lp::{self, LpOutcome};
use crate::simplicial::shape::{shape_of_points, ShapeStats};

/// Vertex ids of a simplex, strictly increasing in the global order.
pub type Simplex = Vec<usize>;

/// Smallest separation margin, in extent-normalized coordinates, that counts
/// as the two simplices meeting only in their shared face.
pub const SEPARATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialComplex {
    ambient_dim: usize,
    vertices: Vec<DVector<f64>>,
    by_dim: Vec<Vec<Simplex>>,
    lookup: BTreeMap<Simplex, usize>,
    maximal: Vec<Simplex>,
    vertex_maximal: Vec<Vec<usize>>,
}

impl SimplicialComplex {
    /// Validating constructor for user input. The global vertex order is the
    /// input order; `simplices` may list only top simplices.
    pub fn build(ambient_dim: usize, coords: Vec<Vec<f64>>, simplices: Vec<Vec<usize>>) -> Result<Self> {
        let mut vertices = Vec::with_capacity(coords.len());
        for (i, c) in coords.into_iter().enumerate() {
            if c.len() != ambient_dim {
                return Err(JiggleError::Malformed(format!(
                    "vertex {i} has {} coordinates, expected {ambient_dim}",
                    c.len()
                )));
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(JiggleError::Malformed(format!("vertex {i} has a non-finite coordinate")));
            }
            vertices.push(DVector::from_vec(c));
        }
        let n = vertices.len();
        let mut lists = Vec::with_capacity(simplices.len());
        for s in simplices {
            if s.is_empty() {
                return Err(JiggleError::Malformed("empty simplex".into()));
            }
            if let Some(&bad) = s.iter().find(|&&i| i >= n) {
                return Err(JiggleError::IndexOutOfRange { index: bad, count: n });
            }
            let mut s = s;
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(JiggleError::Malformed(format!("repeated vertex in simplex {s:?}")));
            }
            if s.len() > ambient_dim + 1 {
                return Err(JiggleError::DegenerateSimplex(s));
            }
            lists.push(s);
        }
        let k = Self::from_parts(ambient_dim, vertices, lists);
        for s in &k.maximal {
            if s.len() > 1 && shape_of_points(&k.points(s)).is_degenerate() {
                return Err(JiggleError::DegenerateSimplex(s.clone()));
            }
        }
        k.check_intersections()?;
        Ok(k)
    }

    /// Face-closes the given simplices without geometric validation. Used for
    /// complexes produced by subdivision, whose validity follows from the parent.
    pub fn from_parts(ambient_dim: usize, vertices: Vec<DVector<f64>>, simplices: Vec<Simplex>) -> Self {
        let n = vertices.len();
        let mut all: BTreeSet<Simplex> = (0..n).map(|v| vec![v]).collect();
        for s in &simplices {
            let m = s.len();
            debug_assert!(s.windows(2).all(|w| w[0] < w[1]));
            for mask in 1u64..(1u64 << m) {
                let face: Simplex = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).collect();
                all.insert(face);
            }
        }
        let top = all.iter().map(|s| s.len()).max().unwrap_or(0);
        let mut by_dim: Vec<Vec<Simplex>> = vec![Vec::new(); top];
        for s in &all {
            by_dim[s.len() - 1].push(s.clone());
        }
        let mut lookup = BTreeMap::new();
        for layer in &by_dim {
            for (i, s) in layer.iter().enumerate() {
                lookup.insert(s.clone(), i);
            }
        }
        let mut has_coface: BTreeSet<&Simplex> = BTreeSet::new();
        let mut scratch: Vec<Simplex> = Vec::new();
        for layer in by_dim.iter().skip(1) {
            for s in layer {
                for skip in 0..s.len() {
                    let mut f = s.clone();
                    f.remove(skip);
                    scratch.push(f);
                }
            }
        }
        for f in &scratch {
            has_coface.insert(f);
        }
        let mut maximal: Vec<Simplex> = Vec::new();
        for layer in by_dim.iter().rev() {
            for s in layer {
                if !has_coface.contains(s) {
                    maximal.push(s.clone());
                }
            }
        }
        let mut vertex_maximal = vec![Vec::new(); n];
        for (i, s) in maximal.iter().enumerate() {
            for &v in s {
                vertex_maximal[v].push(i);
            }
        }
        SimplicialComplex { ambient_dim, vertices, by_dim, lookup, maximal, vertex_maximal }
    }

    pub fn empty(ambient_dim: usize) -> Self {
        Self::from_parts(ambient_dim, Vec::new(), Vec::new())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex(&self, i: usize) -> &DVector<f64> {
        &self.vertices[i]
    }

    pub fn vertices(&self) -> &[DVector<f64>] {
        &self.vertices
    }

    /// Dimension of the largest simplex, `None` for the empty complex.
    pub fn dim(&self) -> Option<usize> {
        self.by_dim.len().checked_sub(1)
    }

    pub fn simplices(&self, dim: usize) -> &[Simplex] {
        self.by_dim.get(dim).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn all_simplices(&self) -> impl Iterator<Item = &Simplex> {
        self.by_dim.iter().flatten()
    }

    pub fn num_simplices(&self) -> usize {
        self.lookup.len()
    }

    pub fn contains(&self, s: &[usize]) -> bool {
        self.lookup.contains_key(s)
    }

    /// Index of `s` within `simplices(s.len() - 1)`.
    pub fn index_of(&self, s: &[usize]) -> Option<usize> {
        self.lookup.get(s).copied()
    }

    /// Simplices that are not a proper face of another simplex, highest
    /// dimension first.
    pub fn maximal(&self) -> &[Simplex] {
        &self.maximal
    }

    /// Maximal simplices of the top dimension.
    pub fn top_simplices(&self) -> &[Simplex] {
        self.dim().map(|d| self.simplices(d)).unwrap_or(&[])
    }

    pub fn is_pure(&self) -> bool {
        match self.dim() {
            None => true,
            Some(d) => self.maximal.iter().all(|s| s.len() == d + 1),
        }
    }

    /// Indices into `maximal()` of the maximal simplices containing `v`.
    pub fn maximal_containing(&self, v: usize) -> &[usize] {
        &self.vertex_maximal[v]
    }

    pub fn points(&self, s: &[usize]) -> Vec<&DVector<f64>> {
        s.iter().map(|&i| &self.vertices[i]).collect()
    }

    pub fn shape(&self, s: &[usize]) -> ShapeStats {
        shape_of_points(&self.points(s))
    }

    /// Total top-dimensional volume of the maximal simplices of dimension `dim`.
    pub fn volume(&self, dim: usize) -> f64 {
        self.maximal
            .iter()
            .filter(|s| s.len() == dim + 1)
            .map(|s| crate::linalg::simplex_volume(&self.points(s)))
            .sum()
    }

    /// Verifies that maximal simplices pairwise meet in common faces.
    pub fn check_intersections(&self) -> Result<()> {
        let cells: Vec<Vec<&DVector<f64>>> = self.maximal.iter().map(|s| self.points(s)).collect();
        match first_bad_pair(&self.maximal, &cells) {
            None => Ok(()),
            Some((i, j)) => Err(JiggleError::FaceIntersectionViolation {
                a: self.maximal[i].clone(),
                b: self.maximal[j].clone(),
            }),
        }
    }
}

fn bbox(pts: &[&DVector<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = pts[0].len();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for p in pts {
        for d in 0..n {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    (lo, hi)
}

/// Finds a pair of cells (by combinatorial vertex ids and realized points)
/// whose geometric intersection is not the face spanned by their shared ids.
/// Sweeps along the first coordinate so only overlapping boxes reach the LP.
pub fn first_bad_pair(ids: &[Simplex], cells: &[Vec<&DVector<f64>>]) -> Option<(usize, usize)> {
    if cells.is_empty() || cells[0].is_empty() || cells[0][0].is_empty() {
        return None;
    }
    let boxes: Vec<_> = cells.iter().map(|c| bbox(c)).collect();
    let scale = boxes
        .iter()
        .flat_map(|(lo, hi)| lo.iter().chain(hi.iter()))
        .fold(0.0f64, |a, v| a.max(v.abs()))
        .max(1.0);
    let slack = 1e-9 * scale;
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&a, &b| boxes[a].0[0].total_cmp(&boxes[b].0[0]).then(a.cmp(&b)));
    for (oi, &i) in order.iter().enumerate() {
        for &j in &order[oi + 1..] {
            if boxes[j].0[0] > boxes[i].1[0] + slack {
                break;
            }
            let overlap = (0..boxes[i].0.len())
                .all(|d| boxes[j].0[d] <= boxes[i].1[d] + slack && boxes[i].0[d] <= boxes[j].1[d] + slack);
            if !overlap {
                continue;
            }
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            if !meet_in_shared_face(&ids[a], &cells[a], &ids[b], &cells[b]) {
                return Some((a, b));
            }
        }
    }
    None
}

/// True when the realized simplices meet exactly in the face spanned by the
/// vertex ids they share (or not at all when they share none). Assumes both
/// realizations are non-degenerate.
///
/// Solved as a separation problem: look for a hyperplane containing the
/// shared vertices with the remaining vertices of each simplex strictly on
/// opposite sides. For polyhedra meeting in a common face such a hyperplane
/// always exists, and its margin is a geometric gap rather than a tiny
/// barycentric weight.
pub fn meet_in_shared_face(sa: &[usize], pa: &[&DVector<f64>], sb: &[usize], pb: &[&DVector<f64>]) -> bool {
    let n = pa[0].len();
    let shared: Vec<&DVector<f64>> =
        sa.iter().zip(pa).filter(|(v, _)| sb.contains(v)).map(|(_, p)| *p).collect();
    let only_a: Vec<&DVector<f64>> =
        sa.iter().zip(pa).filter(|(v, _)| !sb.contains(v)).map(|(_, p)| *p).collect();
    let only_b: Vec<&DVector<f64>> =
        sb.iter().zip(pb).filter(|(v, _)| !sa.contains(v)).map(|(_, p)| *p).collect();
    if only_a.is_empty() || only_b.is_empty() {
        return true;
    }
    let origin = shared.first().map(|p| (*p).clone()).unwrap_or_else(|| pa[0].clone());
    let extent = pa.iter().chain(pb.iter()).map(|p| (*p - &origin).amax()).fold(0.0f64, f64::max);
    let inv = if extent > 0.0 { 1.0 / extent } else { 1.0 };
    let local = |p: &DVector<f64>| (p - &origin) * inv;

    // Columns: w+ (n), w- (n), c+, c-, t, then one slack per inequality.
    let n_ineq = only_a.len() + only_b.len() + 2 * n + 1;
    let base = 2 * n + 3;
    let width = base + n_ineq;
    let t_col = 2 * n + 2;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    let plane_row = |p: &DVector<f64>, sign: f64| {
        let mut row = vec![0.0; width];
        for d in 0..n {
            row[d] = sign * p[d];
            row[n + d] = -sign * p[d];
        }
        row[2 * n] = -sign;
        row[2 * n + 1] = sign;
        row
    };
    for p in &shared {
        rows.push(plane_row(&local(p), 1.0));
        rhs.push(0.0);
    }
    let mut slack = base;
    for (group, sign) in [(&only_a, 1.0), (&only_b, -1.0)] {
        for p in group.iter() {
            let mut row = plane_row(&local(p), sign);
            row[t_col] = 1.0;
            row[slack] = 1.0;
            slack += 1;
            rows.push(row);
            rhs.push(0.0);
        }
    }
    for d in 0..n {
        for col in [d, n + d] {
            let mut row = vec![0.0; width];
            row[col] = 1.0;
            row[slack] = 1.0;
            slack += 1;
            rows.push(row);
            rhs.push(1.0);
        }
    }
    let mut row = vec![0.0; width];
    row[t_col] = 1.0;
    row[slack] = 1.0;
    rows.push(row);
    rhs.push(1.0);
    let mut c = vec![0.0; width];
    c[t_col] = 1.0;
    match lp::maximize(&rows, &rhs, &c) {
        LpOutcome::Optimal { value, .. } => value > SEPARATION_TOL,
        LpOutcome::Infeasible | LpOutcome::Unbounded => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> SimplicialComplex {
        SimplicialComplex::build(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], vec![vec![0, 1, 2]]).unwrap()
    }

    #[test]
    fn unit_triangle_closure() {
        let k = tri();
        assert_eq!(k.simplices(0).len(), 3);
        assert_eq!(k.simplices(1).len(), 3);
        assert_eq!(k.simplices(2).len(), 1);
        assert_eq!(k.dim(), Some(2));
        assert!(k.is_pure());
    }

    #[test]
    fn two_triangles_sharing_edge() {
        let k = SimplicialComplex::build(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
            vec![vec![0, 1, 2], vec![1, 2, 3]],
        )
        .unwrap();
        assert_eq!(k.num_vertices(), 4);
        assert_eq!(k.simplices(1).len(), 5);
        assert_eq!(k.simplices(2).len(), 2);
    }

    #[test]
    fn half_edge_overlap_rejected() {
        // Second triangle's base runs along half of the first one's base.
        let r = SimplicialComplex::build(
            2,
            vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![3.0, 0.0], vec![2.0, -1.0]],
            vec![vec![0, 1, 2], vec![3, 4, 5]],
        );
        assert!(matches!(r, Err(JiggleError::FaceIntersectionViolation { .. })));
    }

    #[test]
    fn degenerate_rejected() {
        let r = SimplicialComplex::build(2, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]], vec![vec![0, 1, 2]]);
        assert!(matches!(r, Err(JiggleError::DegenerateSimplex(_))));
    }

    #[test]
    fn index_checks() {
        let r = SimplicialComplex::build(1, vec![vec![0.0]], vec![vec![0, 1]]);
        assert!(matches!(r, Err(JiggleError::IndexOutOfRange { index: 1, count: 1 })));
    }

    #[test]
    fn touching_at_vertex_only_is_fine() {
        let k = SimplicialComplex::build(
            2,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![0.0, -1.0]],
            vec![vec![0, 1, 2], vec![0, 3, 4]],
        );
        assert!(k.is_ok());
    }

    #[test]
    fn vertex_inside_other_triangle_rejected() {
        let r = SimplicialComplex::build(
            2,
            vec![vec![0.0, 0.0], vec![4.0, 0.0], vec![0.0, 4.0], vec![1.0, 1.0], vec![5.0, 5.0], vec![5.0, 6.0]],
            vec![vec![0, 1, 2], vec![3, 4, 5]],
        );
        assert!(matches!(r, Err(JiggleError::FaceIntersectionViolation { .. })));
    }
}

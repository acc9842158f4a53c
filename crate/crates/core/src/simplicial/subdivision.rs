use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::complex::{Simplex, SimplicialComplex};
use crate::error::{JiggleError, Result};
use crate::linalg::simplex_volume;

/// Relation between a parent complex and one of its subdivisions. Each child
/// vertex is recorded as a convex combination of parent vertices; the
/// carrier of a child simplex is the union of its vertices' supports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubdivisionMap {
    pub parent_vertices: usize,
    /// Per child vertex: `(parent vertex, weight)` pairs, sorted by parent id,
    /// all weights positive.
    pub weights: Vec<Vec<(usize, f64)>>,
}

impl SubdivisionMap {
    pub fn identity(n: usize) -> Self {
        SubdivisionMap { parent_vertices: n, weights: (0..n).map(|v| vec![(v, 1.0)]).collect() }
    }

    pub fn child_vertices(&self) -> usize {
        self.weights.len()
    }

    pub fn vertex_carrier(&self, v: usize) -> Simplex {
        self.weights[v].iter().map(|&(p, _)| p).collect()
    }

    /// Smallest parent simplex containing the child simplex.
    pub fn carrier(&self, child: &[usize]) -> Simplex {
        let mut out: Simplex = child.iter().flat_map(|&v| self.weights[v].iter().map(|&(p, _)| p)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// `self: K -> K'` followed by `next: K' -> K''` gives `K -> K''`.
    pub fn compose(&self, next: &SubdivisionMap) -> SubdivisionMap {
        assert_eq!(next.parent_vertices, self.child_vertices());
        let weights = next
            .weights
            .iter()
            .map(|ws| {
                let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
                for &(mid, w) in ws {
                    for &(p, u) in &self.weights[mid] {
                        *acc.entry(p).or_insert(0.0) += w * u;
                    }
                }
                acc.into_iter().filter(|&(_, w)| w > 0.0).collect()
            })
            .collect();
        SubdivisionMap { parent_vertices: self.parent_vertices, weights }
    }

    /// Position of child vertex `v` recomputed from the parent's vertices.
    pub fn realize(&self, parent: &SimplicialComplex, v: usize) -> DVector<f64> {
        let mut x = DVector::zeros(parent.ambient_dim());
        for &(p, w) in &self.weights[v] {
            x.axpy(w, parent.vertex(p), 1.0);
        }
        x
    }

    /// Checks that every maximal parent simplex is tiled by the child simplices
    /// it carries: child volumes sum to the parent volume within `rtol`.
    pub fn check_volumes(&self, parent: &SimplicialComplex, child: &SimplicialComplex, rtol: f64) -> Result<()> {
        let mut sums: BTreeMap<Simplex, f64> = BTreeMap::new();
        for s in child.maximal() {
            let c = self.carrier(s);
            if c.len() == s.len() {
                *sums.entry(c).or_insert(0.0) += simplex_volume(&child.points(s));
            }
        }
        for p in parent.maximal() {
            if p.len() == 1 {
                continue;
            }
            let want = simplex_volume(&parent.points(p));
            let got = sums.get(p).copied().unwrap_or(0.0);
            if (got - want).abs() > rtol * want {
                return Err(JiggleError::VolumeMismatch { image: got, domain: want });
            }
        }
        Ok(())
    }
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

/// Integer cube cells of the `level`th subdivision of `{0 ≤ x_1 ≤ … ≤ x_m ≤ 1}`,
/// as lists of grid points (coordinates in units of `2^-level`).
fn region_cells(m: usize, level: u32) -> Vec<Vec<Vec<u64>>> {
    let side = 1u64 << level;
    let perms = permutations(m);
    let mut cells = Vec::new();
    let total = side.pow(m as u32);
    for idx in 0..total {
        let mut corner = vec![0u64; m];
        let mut r = idx;
        for c in corner.iter_mut() {
            *c = r % side;
            r /= side;
        }
        for pi in &perms {
            let mut pts = Vec::with_capacity(m + 1);
            let mut g = corner.clone();
            pts.push(g.clone());
            for &axis in pi {
                g[axis] += 1;
                pts.push(g.clone());
            }
            // Barycenter strictly increasing <=> cell inside the region.
            let sums: Vec<u64> = (0..m).map(|i| pts.iter().map(|p| p[i]).sum()).collect();
            if sums.windows(2).all(|w| w[0] < w[1]) {
                cells.push(pts);
            }
        }
    }
    cells
}

struct VertexTable {
    keys: BTreeMap<Vec<(usize, u64)>, usize>,
    weights: Vec<Vec<(usize, f64)>>,
    coords: Vec<DVector<f64>>,
}

impl VertexTable {
    fn new(parent: &SimplicialComplex, denom: u64) -> Self {
        let mut t = VertexTable { keys: BTreeMap::new(), weights: Vec::new(), coords: Vec::new() };
        for v in 0..parent.num_vertices() {
            t.intern(parent, vec![(v, denom)], denom);
        }
        t
    }

    fn intern(&mut self, parent: &SimplicialComplex, key: Vec<(usize, u64)>, denom: u64) -> usize {
        if let Some(&i) = self.keys.get(&key) {
            return i;
        }
        let i = self.coords.len();
        let ws: Vec<(usize, f64)> = key.iter().map(|&(p, k)| (p, k as f64 / denom as f64)).collect();
        let mut x = DVector::zeros(parent.ambient_dim());
        for &(p, w) in &ws {
            x.axpy(w, parent.vertex(p), 1.0);
        }
        self.keys.insert(key, i);
        self.weights.push(ws);
        self.coords.push(x);
        i
    }
}

/// `level`th crystalline subdivision, using the global vertex order of `k`.
/// Parent vertices keep their indices; new vertices follow in creation order.
pub fn crystalline_subdivide(k: &SimplicialComplex, level: u32) -> (SimplicialComplex, SubdivisionMap) {
    let denom = 1u64 << level;
    let mut table = VertexTable::new(k, denom);
    let mut cell_cache: BTreeMap<usize, Vec<Vec<Vec<u64>>>> = BTreeMap::new();
    let mut children: Vec<Simplex> = Vec::new();
    for s in k.maximal() {
        let m = s.len() - 1;
        if m == 0 {
            children.push(s.clone());
            continue;
        }
        let cells = cell_cache.entry(m).or_insert_with(|| region_cells(m, level));
        for cell in cells.iter() {
            let mut child: Simplex = cell
                .iter()
                .map(|g| {
                    let mut key = Vec::with_capacity(m + 1);
                    let mut prev = 0u64;
                    for (j, &gj) in g.iter().enumerate() {
                        if gj > prev {
                            key.push((s[j], gj - prev));
                        }
                        prev = gj;
                    }
                    if denom > prev {
                        key.push((s[m], denom - prev));
                    }
                    key.sort_unstable();
                    table.intern(k, key, denom)
                })
                .collect();
            child.sort_unstable();
            children.push(child);
        }
    }
    let map = SubdivisionMap { parent_vertices: k.num_vertices(), weights: table.weights };
    (SimplicialComplex::from_parts(k.ambient_dim(), table.coords, children), map)
}

/// One barycentric subdivision. Parent vertices keep their indices; the
/// barycenter of the `i`th simplex of dimension `d ≥ 1` follows, ordered by
/// dimension and then by index.
pub fn barycentric_subdivide(k: &SimplicialComplex) -> (SimplicialComplex, SubdivisionMap) {
    let mut ids: BTreeMap<Simplex, usize> = BTreeMap::new();
    let mut weights = Vec::new();
    let mut coords = Vec::new();
    for d in 0..=k.dim().unwrap_or(0) {
        for s in k.simplices(d) {
            let w = 1.0 / s.len() as f64;
            let mut x = DVector::zeros(k.ambient_dim());
            for &v in s {
                x.axpy(w, k.vertex(v), 1.0);
            }
            ids.insert(s.clone(), coords.len());
            weights.push(s.iter().map(|&v| (v, w)).collect());
            coords.push(x);
        }
    }
    let mut children = Vec::new();
    for s in k.maximal() {
        for pi in permutations(s.len()) {
            let mut chain = Vec::with_capacity(s.len());
            let mut face: Simplex = Vec::new();
            for &i in &pi {
                face.push(s[i]);
                let mut sorted = face.clone();
                sorted.sort_unstable();
                chain.push(ids[&sorted]);
            }
            chain.sort_unstable();
            children.push(chain);
        }
    }
    let map = SubdivisionMap { parent_vertices: k.num_vertices(), weights };
    (SimplicialComplex::from_parts(k.ambient_dim(), coords, children), map)
}

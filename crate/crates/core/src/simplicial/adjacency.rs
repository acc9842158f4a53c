use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::complex::{Simplex, SimplicialComplex};
use crate::error::{JiggleError, Result};

/// A face-closed set of simplices of some ambient complex.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subcomplex {
    simplices: BTreeSet<Simplex>,
}

impl Subcomplex {
    pub fn closure_of<I: IntoIterator<Item = Simplex>>(items: I) -> Self {
        let mut simplices = BTreeSet::new();
        for s in items {
            let m = s.len();
            for mask in 1u64..(1u64 << m) {
                simplices.insert((0..m).filter(|i| mask >> i & 1 == 1).map(|i| s[i]).collect());
            }
        }
        Subcomplex { simplices }
    }

    pub fn vertex(v: usize) -> Self {
        Self::closure_of([vec![v]])
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn contains(&self, s: &[usize]) -> bool {
        self.simplices.contains(s)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter()
    }

    pub fn vertices(&self) -> BTreeSet<usize> {
        self.simplices.iter().filter(|s| s.len() == 1).map(|s| s[0]).collect()
    }

    pub fn count_dim(&self, dim: usize) -> usize {
        self.simplices.iter().filter(|s| s.len() == dim + 1).count()
    }

    /// Simplices that are not a proper face of another member.
    pub fn maximal(&self) -> Vec<Simplex> {
        let mut faces: BTreeSet<Simplex> = BTreeSet::new();
        for s in &self.simplices {
            for skip in 0..s.len() {
                if s.len() > 1 {
                    let mut f = s.clone();
                    f.remove(skip);
                    faces.insert(f);
                }
            }
        }
        self.simplices.iter().filter(|s| !faces.contains(*s)).cloned().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdjacencyKind {
    Star,
    Ring,
    Closure,
    Link,
    Vlink,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Adjacency {
    Complex(Subcomplex),
    Vertices(BTreeSet<usize>),
}

impl SimplicialComplex {
    fn check_query(&self, q: &Subcomplex) -> Result<()> {
        if q.iter().all(|s| self.contains(s)) {
            Ok(())
        } else {
            Err(JiggleError::QueryNotInComplex)
        }
    }

    /// Simplices sharing a vertex with `q`, together with their faces.
    pub fn star(&self, q: &Subcomplex) -> Result<Subcomplex> {
        self.check_query(q)?;
        let mut picked: BTreeSet<usize> = BTreeSet::new();
        for v in q.vertices() {
            picked.extend(self.maximal_containing(v).iter().copied());
        }
        Ok(Subcomplex::closure_of(picked.into_iter().map(|i| self.maximal()[i].clone())))
    }

    pub fn iterated_star(&self, q: &Subcomplex, times: usize) -> Result<Subcomplex> {
        let mut cur = q.clone();
        for _ in 0..times {
            cur = self.star(&cur)?;
        }
        self.check_query(&cur)?;
        Ok(cur)
    }

    /// `cl(star(q) \ q)`.
    pub fn ring(&self, q: &Subcomplex) -> Result<Subcomplex> {
        let st = self.star(q)?;
        Ok(Subcomplex::closure_of(st.iter().filter(|s| !q.contains(s)).cloned()))
    }

    /// Vertices of the ring that are not vertices of the query.
    pub fn ring_vertices(&self, q: &Subcomplex) -> Result<BTreeSet<usize>> {
        let inner = q.vertices();
        Ok(self.ring(q)?.vertices().into_iter().filter(|v| !inner.contains(v)).collect())
    }

    pub fn closure(&self, q: &Subcomplex) -> Result<Subcomplex> {
        self.check_query(q)?;
        Ok(Subcomplex::closure_of(q.iter().cloned()))
    }

    /// Simplices `σ` with `v ∉ σ` and `v * σ` in the complex.
    pub fn link(&self, v: usize) -> Result<Subcomplex> {
        if v >= self.num_vertices() {
            return Err(JiggleError::QueryNotInComplex);
        }
        let items = self.maximal_containing(v).iter().map(|&i| {
            let s = &self.maximal()[i];
            s.iter().copied().filter(|&w| w != v).collect::<Simplex>()
        });
        Ok(Subcomplex::closure_of(items.filter(|s| !s.is_empty())))
    }

    pub fn vlink(&self, v: usize) -> Result<BTreeSet<usize>> {
        Ok(self.link(v)?.vertices())
    }

    pub fn adjacency(&self, q: &Subcomplex, kind: AdjacencyKind) -> Result<Adjacency> {
        let single_vertex = || {
            let vs = q.vertices();
            if q.len() == 1 && vs.len() == 1 {
                Ok(*vs.iter().next().unwrap())
            } else {
                Err(JiggleError::PreconditionViolated("link queries take a single vertex".into()))
            }
        };
        Ok(match kind {
            AdjacencyKind::Star => Adjacency::Complex(self.star(q)?),
            AdjacencyKind::Ring => Adjacency::Complex(self.ring(q)?),
            AdjacencyKind::Closure => Adjacency::Complex(self.closure(q)?),
            AdjacencyKind::Link => Adjacency::Complex(self.link(single_vertex()?)?),
            AdjacencyKind::Vlink => Adjacency::Vertices(self.vlink(single_vertex()?)?),
        })
    }
}

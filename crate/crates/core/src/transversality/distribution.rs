use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{JiggleError, Result};
use crate::grassmannian::Plane;
use crate::linalg::RANK_RTOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Constant,
    AnalyticBuiltin,
    SampledInterpolated,
}

/// A field of `k`-planes on `R^n`.
pub trait Distribution: Send + Sync {
    fn ambient_dim(&self) -> usize;
    fn rank(&self) -> usize;
    fn eval(&self, x: &DVector<f64>) -> Plane;
    fn kind(&self) -> DistributionKind;
    /// `L` with `d_proj(ξ_x, ξ_y) ≤ L |x − y|`, when one is known.
    fn lipschitz(&self) -> Option<f64>;
    fn spec(&self) -> DistributionSpec;
    fn constant_plane(&self) -> Option<&Plane> {
        None
    }
}

/// Serialized form of a distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum DistributionSpec {
    Constant {
        basis: Vec<Vec<f64>>,
    },
    Builtin {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ambient_dim: Option<usize>,
    },
    Samples {
        points: Vec<Vec<f64>>,
        planes: Vec<Vec<Vec<f64>>>,
    },
}

#[derive(Debug, Clone)]
pub struct ConstantDistribution {
    plane: Plane,
}

impl ConstantDistribution {
    pub fn new(plane: Plane) -> Self {
        ConstantDistribution { plane }
    }
}

impl Distribution for ConstantDistribution {
    fn ambient_dim(&self) -> usize {
        self.plane.ambient_dim()
    }
    fn rank(&self) -> usize {
        self.plane.dim()
    }
    fn eval(&self, _x: &DVector<f64>) -> Plane {
        self.plane.clone()
    }
    fn kind(&self) -> DistributionKind {
        DistributionKind::Constant
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(0.0)
    }
    fn spec(&self) -> DistributionSpec {
        DistributionSpec::Constant { basis: self.plane.basis_vectors().iter().map(|v| v.iter().copied().collect()).collect() }
    }
    fn constant_plane(&self) -> Option<&Plane> {
        Some(&self.plane)
    }
}

/// Line field in the `e₁e₂` plane at angle `ω·x₁`.
#[derive(Debug, Clone)]
pub struct PlanarRotor {
    pub n: usize,
    pub omega: f64,
}

impl Distribution for PlanarRotor {
    fn ambient_dim(&self) -> usize {
        self.n
    }
    fn rank(&self) -> usize {
        1
    }
    fn eval(&self, x: &DVector<f64>) -> Plane {
        let th = self.omega * x[0];
        let mut b = nalgebra::DMatrix::zeros(self.n, 1);
        b[(0, 0)] = th.cos();
        b[(1, 0)] = th.sin();
        Plane::from_orthonormal(b)
    }
    fn kind(&self) -> DistributionKind {
        DistributionKind::AnalyticBuiltin
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(self.omega.abs())
    }
    fn spec(&self) -> DistributionSpec {
        DistributionSpec::Builtin { name: format!("planar_rotor({})", self.omega), ambient_dim: Some(self.n) }
    }
}

/// Line field on `R³` along `(cos z, sin z, 0)`.
#[derive(Debug, Clone)]
pub struct VerticalTwist;

impl Distribution for VerticalTwist {
    fn ambient_dim(&self) -> usize {
        3
    }
    fn rank(&self) -> usize {
        1
    }
    fn eval(&self, x: &DVector<f64>) -> Plane {
        Plane::from_orthonormal(nalgebra::DMatrix::from_column_slice(3, 1, &[x[2].cos(), x[2].sin(), 0.0]))
    }
    fn kind(&self) -> DistributionKind {
        DistributionKind::AnalyticBuiltin
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(1.0)
    }
    fn spec(&self) -> DistributionSpec {
        DistributionSpec::Builtin { name: "vertical_twist".into(), ambient_dim: Some(3) }
    }
}

/// The standard contact structure `span(e₂, e₁ + y e₃)` on `R³`.
#[derive(Debug, Clone)]
pub struct ContactLike;

impl Distribution for ContactLike {
    fn ambient_dim(&self) -> usize {
        3
    }
    fn rank(&self) -> usize {
        2
    }
    fn eval(&self, x: &DVector<f64>) -> Plane {
        let y = x[1];
        let r = (1.0 + y * y).sqrt();
        Plane::from_orthonormal(nalgebra::DMatrix::from_column_slice(3, 2, &[0.0, 1.0, 0.0, 1.0 / r, 0.0, y / r]))
    }
    fn kind(&self) -> DistributionKind {
        DistributionKind::AnalyticBuiltin
    }
    fn lipschitz(&self) -> Option<f64> {
        Some(1.0)
    }
    fn spec(&self) -> DistributionSpec {
        DistributionSpec::Builtin { name: "contact_like".into(), ambient_dim: Some(3) }
    }
}

/// Nearest-sample plane field.
#[derive(Debug, Clone)]
pub struct SampledDistribution {
    points: Vec<DVector<f64>>,
    planes: Vec<Plane>,
}

impl SampledDistribution {
    pub fn new(points: Vec<DVector<f64>>, planes: Vec<Plane>) -> Result<Self> {
        if points.is_empty() || points.len() != planes.len() {
            return Err(JiggleError::Malformed("samples need one plane per point".into()));
        }
        let n = points[0].len();
        let k = planes[0].dim();
        if points.iter().any(|p| p.len() != n) || planes.iter().any(|q| q.ambient_dim() != n || q.dim() != k) {
            return Err(JiggleError::Malformed("samples have inconsistent dimensions".into()));
        }
        Ok(SampledDistribution { points, planes })
    }
}

impl Distribution for SampledDistribution {
    fn ambient_dim(&self) -> usize {
        self.points[0].len()
    }
    fn rank(&self) -> usize {
        self.planes[0].dim()
    }
    fn eval(&self, x: &DVector<f64>) -> Plane {
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (p - x).norm_squared();
            if d < bd {
                bd = d;
                best = i;
            }
        }
        self.planes[best].clone()
    }
    fn kind(&self) -> DistributionKind {
        DistributionKind::SampledInterpolated
    }
    fn lipschitz(&self) -> Option<f64> {
        None
    }
    fn spec(&self) -> DistributionSpec {
        DistributionSpec::Samples {
            points: self.points.iter().map(|p| p.iter().copied().collect()).collect(),
            planes: self
                .planes
                .iter()
                .map(|q| q.basis_vectors().iter().map(|v| v.iter().copied().collect()).collect())
                .collect(),
        }
    }
}

type Builder = fn(&[f64], Option<usize>) -> Result<Arc<dyn Distribution>>;

/// Named analytic distributions. Names take an optional parenthesized list
/// of numeric parameters, e.g. `planar_rotor(2.5)`.
pub struct DistributionRegistry {
    builders: BTreeMap<&'static str, Builder>,
}

impl Default for DistributionRegistry {
    fn default() -> Self {
        let mut r = DistributionRegistry { builders: BTreeMap::new() };
        r.register("planar_rotor", |params, n| {
            let omega = params.first().copied().unwrap_or(1.0);
            let n = n.unwrap_or(2);
            if n < 2 {
                return Err(JiggleError::UnsupportedDimension(n));
            }
            Ok(Arc::new(PlanarRotor { n, omega }))
        });
        r.register("vertical_twist", |_, n| match n {
            None | Some(3) => Ok(Arc::new(VerticalTwist)),
            Some(other) => Err(JiggleError::UnsupportedDimension(other)),
        });
        r.register("contact_like", |_, n| match n {
            None | Some(3) => Ok(Arc::new(ContactLike)),
            Some(other) => Err(JiggleError::UnsupportedDimension(other)),
        });
        r
    }
}

impl DistributionRegistry {
    pub fn register(&mut self, name: &'static str, builder: Builder) {
        self.builders.insert(name, builder);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.builders.keys().copied().collect()
    }

    pub fn build(&self, name: &str, ambient_dim: Option<usize>) -> Result<Arc<dyn Distribution>> {
        let (head, params) = parse_call(name)?;
        let b = self
            .builders
            .get(head.as_str())
            .ok_or_else(|| JiggleError::UnknownName { kind: "distribution", name: name.to_string() })?;
        b(&params, ambient_dim)
    }

    pub fn from_spec(&self, spec: &DistributionSpec) -> Result<Arc<dyn Distribution>> {
        match spec {
            DistributionSpec::Constant { basis } => {
                let n = basis.first().map(|v| v.len()).ok_or(JiggleError::RankDeficient)?;
                let vs: Vec<DVector<f64>> = basis.iter().map(|v| DVector::from_column_slice(v)).collect();
                Ok(Arc::new(ConstantDistribution::new(Plane::from_spanning(&vs, n, RANK_RTOL)?)))
            }
            DistributionSpec::Builtin { name, ambient_dim } => self.build(name, *ambient_dim),
            DistributionSpec::Samples { points, planes } => {
                let n = points.first().map(|p| p.len()).unwrap_or(0);
                let pts = points.iter().map(|p| DVector::from_column_slice(p)).collect();
                let mut ps = Vec::with_capacity(planes.len());
                for basis in planes {
                    let vs: Vec<DVector<f64>> = basis.iter().map(|v| DVector::from_column_slice(v)).collect();
                    ps.push(Plane::from_spanning(&vs, n, RANK_RTOL)?);
                }
                Ok(Arc::new(SampledDistribution::new(pts, ps)?))
            }
        }
    }
}

fn parse_call(s: &str) -> Result<(String, Vec<f64>)> {
    let s = s.trim();
    let Some(open) = s.find('(') else { return Ok((s.to_string(), Vec::new())) };
    if !s.ends_with(')') {
        return Err(JiggleError::Malformed(format!("unbalanced parameters in `{s}`")));
    }
    let inner = &s[open + 1..s.len() - 1];
    let params = inner
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<f64>().map_err(|_| JiggleError::Malformed(format!("bad parameter `{t}` in `{s}`"))))
        .collect::<Result<Vec<f64>>>()?;
    Ok((s[..open].trim().to_string(), params))
}

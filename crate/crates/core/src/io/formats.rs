//! JSON file formats. Every top-level object carries `schema_version`.

use std::path::Path;
use std::sync::Arc;

use nalgebra::DVector;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::engine::{JiggleInput, JigglingConfig, JigglingOutcome, ModeRegistry, RelativeRegion, VertexMove};
use crate::error::{JiggleError, Result};
use crate::pl_maps::{Distances, PLMap};
use crate::simplicial::{SimplicialComplex, Subcomplex, SubdivisionMap};
use crate::transversality::{Distribution, DistributionRegistry, DistributionSpec, TransversalityReport};

pub const SCHEMA_VERSION: u32 = 1;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug)]
pub enum IoFailure {
    /// Unreadable file or invalid JSON; the message carries the location.
    Parse(String),
    /// Well-formed JSON describing an invalid object.
    Invalid(JiggleError),
}

impl std::fmt::Display for IoFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IoFailure::Parse(m) => write!(f, "parse error: {m}"),
            IoFailure::Invalid(e) => write!(f, "invalid input: {e}"),
        }
    }
}

impl std::error::Error for IoFailure {}

impl From<JiggleError> for IoFailure {
    fn from(e: JiggleError) -> Self {
        IoFailure::Invalid(e)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> std::result::Result<T, IoFailure> {
    let text = std::fs::read_to_string(path).map_err(|e| IoFailure::Parse(format!("{}: {e}", path.display())))?;
    parse_json(&text).map_err(|e| match e {
        IoFailure::Parse(m) => IoFailure::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> std::result::Result<T, IoFailure> {
    serde_json::from_str(text).map_err(|e| IoFailure::Parse(e.to_string()))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(JiggleError::Malformed(format!("unsupported schema_version {v}")));
    }
    Ok(())
}

fn vecs(points: &[DVector<f64>]) -> Vec<Vec<f64>> {
    points.iter().map(|p| p.iter().copied().collect()).collect()
}

fn dvecs(points: &[Vec<f64>]) -> Vec<DVector<f64>> {
    points.iter().map(|p| DVector::from_column_slice(p)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexFile {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub ambient_dim: usize,
    pub vertices: Vec<Vec<f64>>,
    /// Maximal simplices.
    pub simplices: Vec<Vec<usize>>,
}

impl ComplexFile {
    pub fn from_complex(k: &SimplicialComplex) -> Self {
        ComplexFile {
            schema_version: SCHEMA_VERSION,
            ambient_dim: k.ambient_dim(),
            vertices: vecs(k.vertices()),
            simplices: k.maximal().to_vec(),
        }
    }

    /// Validating constructor: dimensions, degeneracy and intersections.
    pub fn to_complex(&self) -> Result<SimplicialComplex> {
        check_version(self.schema_version)?;
        SimplicialComplex::build(self.ambient_dim, self.vertices.clone(), self.simplices.clone())
    }

    /// Trusting constructor for files this crate wrote itself.
    pub fn to_complex_unchecked(&self) -> Result<SimplicialComplex> {
        check_version(self.schema_version)?;
        if self.vertices.iter().any(|v| v.len() != self.ambient_dim) {
            return Err(JiggleError::Malformed("vertex of wrong dimension".into()));
        }
        let n = self.vertices.len();
        if let Some(&index) = self.simplices.iter().flatten().find(|&&i| i >= n) {
            return Err(JiggleError::IndexOutOfRange { index, count: n });
        }
        Ok(SimplicialComplex::from_parts(self.ambient_dim, dvecs(&self.vertices), self.simplices.clone()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapFile {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub complex: ComplexFile,
    pub target_dim: usize,
    pub images: Vec<Vec<f64>>,
}

impl MapFile {
    pub fn from_map(f: &PLMap) -> Self {
        MapFile {
            schema_version: SCHEMA_VERSION,
            complex: ComplexFile::from_complex(f.domain()),
            target_dim: f.target_dim(),
            images: vecs(f.images()),
        }
    }

    pub fn to_map(&self) -> Result<PLMap> {
        check_version(self.schema_version)?;
        PLMap::new(self.complex.to_complex()?, self.target_dim, dvecs(&self.images))
    }
}

/// Output of `subdivide`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubdivisionFile {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub complex: ComplexFile,
    pub subdivision: SubdivisionMap,
}

/// Either a builtin complex name or an inline complex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexRef {
    Builtin(String),
    Inline(ComplexFile),
}

impl ComplexRef {
    pub fn resolve(&self) -> Result<SimplicialComplex> {
        match self {
            ComplexRef::Builtin(name) => super::scenarios::builtin_complex(name),
            ComplexRef::Inline(c) => c.to_complex(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementSpec {
    pub complex: ComplexRef,
    pub subdivision: SubdivisionMap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeSpec {
    pub a: Vec<Vec<usize>>,
    #[serde(default)]
    pub b: Vec<Vec<usize>>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub complex: ComplexRef,
    /// Vertex images of the PL map; the inclusion when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images: Option<Vec<Vec<f64>>>,
    pub distribution: DistributionSpec,
    #[serde(default)]
    pub config: JigglingConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement: Option<RefinementSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative: Option<RelativeSpec>,
}

pub struct Scenario {
    pub f: PLMap,
    pub xi: Arc<dyn Distribution>,
    pub config: JigglingConfig,
    pub mode: Option<String>,
    pub levels: Option<Vec<u32>>,
    pub refinement: Option<(SimplicialComplex, SubdivisionMap)>,
    pub region: Option<RelativeRegion>,
}

impl ScenarioFile {
    pub fn resolve(&self) -> Result<Scenario> {
        check_version(self.schema_version)?;
        let k = self.complex.resolve()?;
        let f = match &self.images {
            Some(im) => {
                let n = im.first().map_or(k.ambient_dim(), |p| p.len());
                PLMap::new(k, n, dvecs(im))?
            }
            None => PLMap::identity(&k),
        };
        let xi = DistributionRegistry::default().from_spec(&self.distribution)?;
        let refinement = match &self.refinement {
            Some(r) => {
                let k2 = r.complex.resolve()?;
                let sub = r.subdivision.clone();
                if sub.parent_vertices != f.domain().num_vertices() || sub.child_vertices() != k2.num_vertices() {
                    return Err(JiggleError::DomainMismatch);
                }
                Some((k2, sub))
            }
            None => None,
        };
        let region = match &self.relative {
            Some(r) => {
                let nv = f.domain().num_vertices();
                if let Some(&index) = r.a.iter().chain(&r.b).flatten().find(|&&i| i >= nv) {
                    return Err(JiggleError::IndexOutOfRange { index, count: nv });
                }
                let sorted = |s: &Vec<Vec<usize>>| -> Vec<Vec<usize>> {
                    s.iter()
                        .map(|x| {
                            let mut x = x.clone();
                            x.sort_unstable();
                            x
                        })
                        .collect()
                };
                Some(RelativeRegion {
                    a: Subcomplex::closure_of(sorted(&r.a)),
                    b: Subcomplex::closure_of(sorted(&r.b)),
                    radius: r.radius,
                })
            }
            None => None,
        };
        Ok(Scenario {
            f,
            xi,
            config: self.config.clone(),
            mode: self.mode.clone(),
            levels: self.levels.clone(),
            refinement,
            region,
        })
    }
}

impl Scenario {
    /// Mode name: the explicit one, else `tower` when levels are listed,
    /// else `euclidean`.
    pub fn mode_name(&self) -> &str {
        match (&self.mode, &self.levels) {
            (Some(m), _) => m,
            (None, Some(_)) => "tower",
            (None, None) => "euclidean",
        }
    }

    pub fn run(&self, registry: &ModeRegistry) -> Result<Vec<JigglingOutcome>> {
        self.config.validate()?;
        let mode = registry.get(self.mode_name())?;
        let mut input = JiggleInput::new(&self.f, self.xi.as_ref());
        input.levels = self.levels.as_deref();
        input.refinement = self.refinement.as_ref().map(|(k, s)| (k, s));
        input.region = self.region.as_ref();
        mode.run(&input, &self.config)
    }

    pub fn bundles(&self, outcomes: &[JigglingOutcome]) -> Vec<OutcomeBundle> {
        outcomes.iter().map(|o| OutcomeBundle::new(o, &self.config, self.xi.spec())).collect()
    }
}

/// A jiggling outcome with the configuration and distribution that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeBundle {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub mode: String,
    pub level: u32,
    pub config: JigglingConfig,
    pub distribution: DistributionSpec,
    pub map: MapFile,
    pub subdivision: SubdivisionMap,
    pub report: TransversalityReport,
    pub distances: Distances,
    pub epsilon_vertex: f64,
    pub moves: Vec<VertexMove>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<Vec<Vec<f64>>>,
}

impl OutcomeBundle {
    pub fn new(o: &JigglingOutcome, config: &JigglingConfig, distribution: DistributionSpec) -> Self {
        OutcomeBundle {
            schema_version: SCHEMA_VERSION,
            mode: o.mode.clone(),
            level: o.level,
            config: config.clone(),
            distribution,
            map: MapFile::from_map(&o.g),
            subdivision: o.subdivision.clone(),
            report: o.report.clone(),
            distances: o.distances,
            epsilon_vertex: o.epsilon_vertex,
            moves: o.moves.clone(),
            transform: o.transform.as_ref().map(|t| vecs(t.images())),
        }
    }

    pub fn to_outcome(&self) -> Result<JigglingOutcome> {
        check_version(self.schema_version)?;
        check_version(self.map.schema_version)?;
        let k = self.map.complex.to_complex_unchecked()?;
        let transform = match &self.transform {
            Some(t) => Some(PLMap::new(k.clone(), k.ambient_dim(), dvecs(t))?),
            None => None,
        };
        Ok(JigglingOutcome {
            mode: self.mode.clone(),
            level: self.level,
            g: PLMap::new(k, self.map.target_dim, dvecs(&self.map.images))?,
            subdivision: self.subdivision.clone(),
            report: self.report.clone(),
            distances: self.distances,
            epsilon_vertex: self.epsilon_vertex,
            moves: self.moves.clone(),
            transform,
        })
    }
}

/// Several outcomes, as written by the tower mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSet {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub outcomes: Vec<OutcomeBundle>,
}

use std::collections::BTreeMap;

use super::config::JigglingConfig;
use super::euclidean::{jiggle_euclidean, jiggle_tower, JigglingOutcome};
use super::relative::{jiggle_relative, RelativeRegion};
use super::subdivision::jiggle_subdivision;
use crate::error::{JiggleError, Result};
use crate::pl_maps::DomainMap;
use crate::simplicial::{SimplicialComplex, SubdivisionMap};
use crate::transversality::Distribution;

/// Everything a pipeline may read. Modes reject inputs they need but lack.
pub struct JiggleInput<'a> {
    pub f: &'a dyn DomainMap,
    pub xi: &'a dyn Distribution,
    pub levels: Option<&'a [u32]>,
    pub refinement: Option<(&'a SimplicialComplex, &'a SubdivisionMap)>,
    pub region: Option<&'a RelativeRegion>,
}

impl<'a> JiggleInput<'a> {
    pub fn new(f: &'a dyn DomainMap, xi: &'a dyn Distribution) -> Self {
        JiggleInput { f, xi, levels: None, refinement: None, region: None }
    }
}

pub trait JiggleMode: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, input: &JiggleInput, cfg: &JigglingConfig) -> Result<Vec<JigglingOutcome>>;
}

fn missing(what: &str) -> JiggleError {
    JiggleError::Malformed(format!("mode needs {what}"))
}

struct Euclidean;
struct Tower;
struct Subdivision;
struct Relative;

impl JiggleMode for Euclidean {
    fn name(&self) -> &'static str {
        "euclidean"
    }
    fn run(&self, input: &JiggleInput, cfg: &JigglingConfig) -> Result<Vec<JigglingOutcome>> {
        Ok(vec![jiggle_euclidean(input.f, input.xi, cfg)?])
    }
}

impl JiggleMode for Tower {
    fn name(&self) -> &'static str {
        "tower"
    }
    fn run(&self, input: &JiggleInput, cfg: &JigglingConfig) -> Result<Vec<JigglingOutcome>> {
        jiggle_tower(input.f, input.xi, cfg, input.levels.ok_or_else(|| missing("a level range"))?)
    }
}

impl JiggleMode for Subdivision {
    fn name(&self) -> &'static str {
        "subdivision"
    }
    fn run(&self, input: &JiggleInput, cfg: &JigglingConfig) -> Result<Vec<JigglingOutcome>> {
        let f = input.f.as_pl().ok_or_else(|| missing("a piecewise linear map"))?;
        let (k2, sub) = input.refinement.ok_or_else(|| missing("a subdivision of the domain"))?;
        Ok(vec![jiggle_subdivision(f, k2, sub, input.xi, cfg)?])
    }
}

impl JiggleMode for Relative {
    fn name(&self) -> &'static str {
        "relative"
    }
    fn run(&self, input: &JiggleInput, cfg: &JigglingConfig) -> Result<Vec<JigglingOutcome>> {
        let region = input.region.ok_or_else(|| missing("subcomplexes A and B"))?;
        Ok(vec![jiggle_relative(input.f, input.xi, cfg, region)?])
    }
}

pub struct ModeRegistry {
    modes: BTreeMap<&'static str, Box<dyn JiggleMode>>,
}

impl Default for ModeRegistry {
    fn default() -> Self {
        let mut r = ModeRegistry { modes: BTreeMap::new() };
        r.register(Box::new(Euclidean));
        r.register(Box::new(Tower));
        r.register(Box::new(Subdivision));
        r.register(Box::new(Relative));
        r
    }
}

impl ModeRegistry {
    pub fn register(&mut self, mode: Box<dyn JiggleMode>) {
        self.modes.insert(mode.name(), mode);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.modes.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn JiggleMode> {
        self.modes.get(name).map(|m| m.as_ref()).ok_or_else(|| JiggleError::UnknownName { kind: "mode", name: name.into() })
    }
}

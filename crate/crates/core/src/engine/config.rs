use serde::{Deserialize, Serialize};

use crate::error::{JiggleError, Result};
use crate::perturbation::DEFAULT_SAMPLES;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative `rmin / rmax` below which an image simplex counts as degenerate.
    pub degeneracy: f64,
    pub rank: f64,
    pub margin_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { degeneracy: 1e-12, rank: 1e-9, margin_floor: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JigglingConfig {
    /// C¹ budget.
    pub gamma: f64,
    /// Crystalline level; `None` picks one with [`crate::engine::auto_level`].
    pub level: Option<u32>,
    pub max_level: u32,
    /// Per-vertex budget before the `2^-ℓ` scaling; `None` uses the budget
    /// derived from `gamma` alone.
    pub epsilon_vertex: Option<f64>,
    pub seed: u64,
    pub samples: usize,
    pub tolerances: Tolerances,
    /// Margin handed to the level selection's oscillation test.
    pub level_margin: f64,
    pub sample_depth: usize,
}

impl Default for JigglingConfig {
    fn default() -> Self {
        JigglingConfig {
            gamma: 0.2,
            level: None,
            max_level: 8,
            epsilon_vertex: None,
            seed: 0,
            samples: DEFAULT_SAMPLES,
            tolerances: Tolerances::default(),
            level_margin: 0.5,
            sample_depth: 3,
        }
    }
}

impl JigglingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(JiggleError::BudgetViolation(format!("gamma must be positive, got {}", self.gamma)));
        }
        let t = &self.tolerances;
        if !(t.margin_floor > 0.0 && t.degeneracy > 0.0 && t.rank > 0.0) {
            return Err(JiggleError::PreconditionViolated("tolerances must be positive".into()));
        }
        if !(self.level_margin > 0.0) || self.samples == 0 || self.sample_depth == 0 {
            return Err(JiggleError::PreconditionViolated("level margin, samples and sample depth must be positive".into()));
        }
        if let Some(e) = self.epsilon_vertex {
            if !(e > 0.0 && e.is_finite()) {
                return Err(JiggleError::BudgetViolation(format!("epsilon_vertex must be positive, got {e}")));
            }
        }
        if let Some(l) = self.level {
            if l > self.max_level {
                return Err(JiggleError::PreconditionViolated(format!("level {l} exceeds max_level {}", self.max_level)));
            }
        }
        Ok(())
    }
}

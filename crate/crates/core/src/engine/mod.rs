//! End-to-end jiggling pipelines.

pub mod config;
mod euclidean;
mod induction;
pub mod level;
pub mod modes;
mod relative;
mod subdivision;

pub use config::{JigglingConfig, Tolerances};
pub use euclidean::{jiggle_euclidean, jiggle_tower, vertex_budget, JigglingOutcome};
pub use induction::{VertexMove, INCUMBENT_SHARE, MAX_FOLIATIONS};
pub use level::{auto_level, ball_oscillation};
pub use modes::{JiggleInput, JiggleMode, ModeRegistry};
pub use relative::{jiggle_relative, RelativeRegion};
pub use subdivision::{jiggle_subdivision, CARRIER_TOL};

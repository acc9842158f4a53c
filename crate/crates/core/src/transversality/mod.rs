//! Transversality predicates and margins against constant foliations and
//! plane fields.

pub mod distribution;
pub mod predicates;
pub mod report;

pub use distribution::{Distribution, DistributionKind, DistributionRegistry, DistributionSpec};
pub use predicates::*;
pub use report::{assess, AssessOptions, Notion, SimplexRecord, TransversalityReport};

// Negated float comparisons are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod grassmannian;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod perturbation;
pub mod pl_maps;
pub mod simplicial;
pub mod transversality;

pub use error::{JiggleError, Result};

//! File formats, builtin scenarios and SVG output.

pub mod formats;
pub mod scenarios;
pub mod svg;

pub use formats::*;
pub use scenarios::{builtin_complex, builtin_scenario};
pub use svg::render_svg;

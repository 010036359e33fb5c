//! The knowledge-base text format, alignment renderers, and the JSON
//! results emitter.

mod json;
mod kb;
mod render;

pub use json::{analyze, emit_json, AnalyzedAlignment, Analysis};
pub use kb::{parse_kb, serialize_kb, KBDocument};
pub use render::{render_alignment, Orientation};

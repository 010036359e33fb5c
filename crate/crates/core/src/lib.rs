//! Symbolic pattern alignment engine.
//!
//! Knowledge is a flat store of one-dimensional symbol patterns. Incoming
//! (New) patterns are analysed by building multiple alignments against the
//! stored (Old) patterns through staged heuristic search, with candidate
//! structures ranked by how economically they encode the New material:
//! `CD = BN - BE`, the bits of New symbols covered minus the bits of the
//! identification symbols left unexplained. On top of that one mechanism
//! sit parsing, recognition at multiple levels of abstraction, probabilistic
//! inference by inheritance of attributes, and unsupervised grammar
//! induction under a two-part MDL objective.

pub mod align;
pub mod error;
pub mod infer;
pub mod io;
pub mod learn;
pub mod model;
pub mod score;

pub use align::{
    build_multiple_alignment, check_alignment_legal, enumerate_alignments_bruteforce,
    flatten_alignment, pairwise_align, Alignment, MatchColumn, OracleLimits, Row, RowKind,
    SearchParams, SymbolInstance,
};
pub use error::{Error, Result, Violation};
pub use infer::{classify, extract_inferences, inference_probabilities, ClassificationReport, Inference};
pub use learn::{assimilate, induce_grammar, Grammar, LearnParams};
pub use model::{
    validate_pattern, KnowledgeStore, NewInput, PatternOrigin, SPPattern, SPSymbol, SymbolRole,
};
pub use score::{
    alignment_probabilities, encode_alignment, grammar_score, symbol_cost, AlignmentProbability,
    EncodingResult, FrequencyTable, GrammarScore,
};

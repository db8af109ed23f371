//! Parsing and agreement analysis for Text World Theory annotations.
//!
//! Several annotators mark up copies of the same text with inline tags for
//! text worlds (`T`), characters (`c`), places (`p`), times (`t`) and
//! switches (`s`). This crate parses those copies into a shared document
//! model and compares them:
//!
//! - [`metrics::match_worlds`] pairs text-world stretches by minimum edit
//!   distance;
//! - [`metrics::align_elements`] identifies characters and places across
//!   annotators and scores them with the Jaccard coefficient;
//! - [`metrics::count_summary`] and [`metrics::switch_agreement`] summarize
//!   how much each annotator tagged and where they agree on switches;
//! - [`consensus`] turns the annotations into per-token membership degrees
//!   and a thresholded consensus.

pub mod consensus;
pub mod corpus;
pub mod metrics;
pub mod model;
pub mod tag_parser;
pub mod tokenize;

pub use corpus::{Corpus, CorpusError};
pub use model::{AnnotatedDocument, ModelError, Span, TagKind};
pub use tag_parser::{parse_annotation, serialize, validate_alignment};
pub use tokenize::{tokenize, Token, TokenizerOptions};

/// Whether independent work items may run on the rayon pool. Results are
/// identical either way.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Exec {
    Serial,
    #[default]
    Parallel,
}

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{AnnotatedDocument, ModelError, TagKind};
use crate::tag_parser::{validate_alignment, AlignmentError, Divergence};
use crate::tokenize::{tokenize_with, tokens_in_range, Token, TokenizerOptions};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Alignment(#[from] AlignmentError),
    #[error("plain texts of {} and {} differ at character {}", .0.first, .0.second, .0.offset)]
    NotAligned(Divergence),
    #[error("duplicate annotator id {0:?}")]
    DuplicateAnnotator(String),
    #[error("unknown annotator id {0:?}")]
    UnknownAnnotator(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Two or more annotations of one text, line endings normalized, sharing a
/// single tokenization.
#[derive(Debug, Clone)]
pub struct Corpus {
    docs: Vec<AnnotatedDocument>,
    tokens: Vec<Token>,
    options: TokenizerOptions,
}

impl Corpus {
    pub fn new(docs: Vec<AnnotatedDocument>, options: TokenizerOptions) -> Result<Corpus, CorpusError> {
        let report = validate_alignment(&docs)?;
        if let Some(divergence) = report.first_divergence {
            return Err(CorpusError::NotAligned(divergence));
        }
        let mut seen = BTreeSet::new();
        for doc in &docs {
            if !seen.insert(doc.annotator_id()) {
                return Err(CorpusError::DuplicateAnnotator(doc.annotator_id().to_string()));
            }
        }
        let docs = docs
            .iter()
            .map(AnnotatedDocument::normalize_line_endings)
            .collect::<Result<Vec<_>, _>>()?;
        let tokens = tokenize_with(docs[0].plain_text(), options);
        Ok(Corpus { docs, tokens, options })
    }

    /// Sub-corpus of the named annotators, in the order given.
    pub fn select(&self, ids: &[&str]) -> Result<Corpus, CorpusError> {
        let docs = ids
            .iter()
            .map(|id| {
                self.docs
                    .iter()
                    .find(|d| d.annotator_id() == *id)
                    .cloned()
                    .ok_or_else(|| CorpusError::UnknownAnnotator(id.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Corpus::new(docs, self.options)
    }

    pub fn docs(&self) -> &[AnnotatedDocument] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn options(&self) -> TokenizerOptions {
        self.options
    }

    pub fn plain_text(&self) -> &str {
        self.docs[0].plain_text()
    }

    pub fn annotator_ids(&self) -> impl Iterator<Item = &str> {
        self.docs.iter().map(|d| d.annotator_id())
    }

    /// Token indices covered by any span of `kind` in document `doc`.
    pub fn coverage(&self, doc: usize, kind: TagKind) -> BTreeSet<usize> {
        self.docs[doc]
            .spans_of(kind)
            .flat_map(|s| tokens_in_range(&self.tokens, s.start, s.end))
            .collect()
    }

    /// Token indices overlapped by `[start, end)`.
    pub fn tokens_between(&self, start: usize, end: usize) -> BTreeSet<usize> {
        tokens_in_range(&self.tokens, start, end).collect()
    }

    /// Text from the start of the first to the end of the last token.
    pub fn token_run_text(&self, first: usize, last: usize) -> &str {
        self.docs[0].slice(self.tokens[first].start, self.tokens[last].end)
    }
}

//! Shared document model: tag kinds, spans, and one annotator's copy of the text.
//!
//! All offsets are counted in Unicode scalar values (`char`s) of the
//! tag-stripped plain text, never in bytes.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::tag_parser;

/// The five element kinds of the annotation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TagKind {
    TextWorld,
    Character,
    Place,
    Time,
    Switch,
}

impl TagKind {
    pub const ALL: [TagKind; 5] = [
        TagKind::TextWorld,
        TagKind::Character,
        TagKind::Place,
        TagKind::Time,
        TagKind::Switch,
    ];

    /// Tag letter used in the inline markup (`T`, `c`, `p`, `t`, `s`).
    pub fn letter(self) -> char {
        match self {
            TagKind::TextWorld => 'T',
            TagKind::Character => 'c',
            TagKind::Place => 'p',
            TagKind::Time => 't',
            TagKind::Switch => 's',
        }
    }

    pub fn from_letter(letter: char) -> Option<TagKind> {
        TagKind::ALL.into_iter().find(|k| k.letter() == letter)
    }

    /// Whether the markup requires a number after the letter.
    pub fn requires_id(self) -> bool {
        matches!(self, TagKind::TextWorld | TagKind::Character | TagKind::Place)
    }

    /// Position in [`TagKind::ALL`]; also the nesting rank used when two
    /// spans cover the same range (lower rank is emitted outermost).
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            TagKind::TextWorld => "text_world",
            TagKind::Character => "character",
            TagKind::Place => "place",
            TagKind::Time => "time",
            TagKind::Switch => "switch",
        }
    }
}

impl fmt::Display for TagKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A tagged region of the plain text, `[start, end)` in chars.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Span {
    pub kind: TagKind,
    pub element_id: Option<u32>,
    pub start: usize,
    pub end: usize,
    /// 1-based appearance index among spans of the same kind. Assigned by
    /// [`AnnotatedDocument::new`]; any value passed in is overwritten.
    pub ordinal: usize,
}

impl Span {
    pub fn new(kind: TagKind, element_id: Option<u32>, start: usize, end: usize) -> Span {
        Span {
            kind,
            element_id,
            start,
            end,
            ordinal: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, start: usize, end: usize) -> bool {
        self.start < end && start < self.end
    }

    /// Markup name without brackets, e.g. `T3`, `c1`, `s`.
    pub fn tag_name(&self) -> String {
        match self.element_id {
            Some(id) => format!("{}{}", self.kind.letter(), id),
            None => self.kind.letter().to_string(),
        }
    }
}

/// Document order: outer spans before the spans they contain. Equal ranges
/// fall back to kind rank, then ordinal.
pub(crate) fn canonical_order(a: &Span, b: &Span) -> Ordering {
    a.start
        .cmp(&b.start)
        .then(b.end.cmp(&a.end))
        .then(a.kind.index().cmp(&b.kind.index()))
        .then(a.ordinal.cmp(&b.ordinal))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("span {tag} [{start}, {end}) is out of range for a text of {len} characters")]
    OffsetOutOfRange {
        tag: String,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("spans {outer} [{outer_start}, {outer_end}) and {inner} [{inner_start}, {inner_end}) partially overlap")]
    CrossingSpans {
        outer: String,
        outer_start: usize,
        outer_end: usize,
        inner: String,
        inner_start: usize,
        inner_end: usize,
    },
    #[error("span {tag} at {start} is nested inside another {tag}")]
    NestedDuplicate { tag: String, start: usize },
    #[error("element id 0 is not allowed (span {kind} at {start})")]
    ZeroElementId { kind: TagKind, start: usize },
    #[error("plain text contains tag markup at character {offset}")]
    MarkupInText { offset: usize },
}

/// One annotator's copy: the shared plain text plus that annotator's spans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedDocument {
    annotator_id: String,
    plain_text: String,
    spans: Vec<Span>,
    // char offset -> byte offset, len + 1 entries
    char_bytes: Vec<usize>,
}

impl AnnotatedDocument {
    /// Validates the spans against `plain_text`, assigns ordinals, and stores
    /// spans in document order.
    ///
    /// Ordinals count spans of one kind by start offset; among spans sharing
    /// a start the outer one comes first, and identical ranges keep their
    /// input order.
    pub fn new(
        annotator_id: impl Into<String>,
        plain_text: impl Into<String>,
        spans: Vec<Span>,
    ) -> Result<AnnotatedDocument, ModelError> {
        let plain_text = plain_text.into();
        if let Some(offset) = tag_parser::find_tag_markup(&plain_text) {
            return Err(ModelError::MarkupInText { offset });
        }
        let char_bytes: Vec<usize> = plain_text
            .char_indices()
            .map(|(b, _)| b)
            .chain(std::iter::once(plain_text.len()))
            .collect();
        let len = char_bytes.len() - 1;

        for span in &spans {
            if span.start >= span.end || span.end > len {
                return Err(ModelError::OffsetOutOfRange {
                    tag: span.tag_name(),
                    start: span.start,
                    end: span.end,
                    len,
                });
            }
            if span.element_id == Some(0) {
                return Err(ModelError::ZeroElementId {
                    kind: span.kind,
                    start: span.start,
                });
            }
        }

        let mut spans = spans;
        for kind in TagKind::ALL {
            let mut of_kind: Vec<&mut Span> = spans.iter_mut().filter(|s| s.kind == kind).collect();
            // stable: identical ranges keep input order
            of_kind.sort_by(|a, b| a.start.cmp(&b.start).then(b.end.cmp(&a.end)));
            for (i, span) in of_kind.into_iter().enumerate() {
                span.ordinal = i + 1;
            }
        }
        spans.sort_by(canonical_order);
        check_nesting(&spans)?;

        Ok(AnnotatedDocument {
            annotator_id: annotator_id.into(),
            plain_text,
            spans,
            char_bytes,
        })
    }

    pub fn annotator_id(&self) -> &str {
        &self.annotator_id
    }

    pub fn plain_text(&self) -> &str {
        &self.plain_text
    }

    /// All spans in document order.
    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    /// Spans of one kind in ordinal order.
    pub fn spans_of(&self, kind: TagKind) -> impl Iterator<Item = &Span> + '_ {
        let mut of_kind: Vec<&Span> = self.spans.iter().filter(|s| s.kind == kind).collect();
        of_kind.sort_by_key(|s| s.ordinal);
        of_kind.into_iter()
    }

    pub fn count(&self, kind: TagKind) -> usize {
        self.spans.iter().filter(|s| s.kind == kind).count()
    }

    /// Length of the plain text in chars.
    pub fn char_len(&self) -> usize {
        self.char_bytes.len() - 1
    }

    /// Substring by char offsets. Panics if the range is out of bounds.
    pub fn slice(&self, start: usize, end: usize) -> &str {
        &self.plain_text[self.char_bytes[start]..self.char_bytes[end]]
    }

    pub fn span_text(&self, span: &Span) -> &str {
        self.slice(span.start, span.end)
    }

    /// Copy with CRLF and lone CR converted to LF, span offsets remapped.
    pub fn normalize_line_endings(&self) -> Result<AnnotatedDocument, ModelError> {
        if !self.plain_text.contains('\r') {
            return Ok(self.clone());
        }
        let chars: Vec<char> = self.plain_text.chars().collect();
        // remap[i] = normalized offset of raw offset i
        let mut remap = Vec::with_capacity(chars.len() + 1);
        let mut text = String::with_capacity(self.plain_text.len());
        let mut out = 0usize;
        for (i, &c) in chars.iter().enumerate() {
            remap.push(out);
            match c {
                '\r' => {
                    text.push('\n');
                    out += 1;
                }
                '\n' if i > 0 && chars[i - 1] == '\r' => {}
                _ => {
                    text.push(c);
                    out += 1;
                }
            }
        }
        remap.push(out);
        let spans = self
            .spans
            .iter()
            .map(|s| Span::new(s.kind, s.element_id, remap[s.start], remap[s.end]))
            .collect();
        AnnotatedDocument::new(self.annotator_id.clone(), text, spans)
    }
}

fn check_nesting(sorted: &[Span]) -> Result<(), ModelError> {
    let mut open: Vec<&Span> = Vec::new();
    for span in sorted {
        while open.last().is_some_and(|top| top.end <= span.start) {
            open.pop();
        }
        if let Some(top) = open.last() {
            if span.end > top.end {
                return Err(ModelError::CrossingSpans {
                    outer: top.tag_name(),
                    outer_start: top.start,
                    outer_end: top.end,
                    inner: span.tag_name(),
                    inner_start: span.start,
                    inner_end: span.end,
                });
            }
        }
        if open.iter().any(|o| o.kind == span.kind && o.element_id == span.element_id) {
            return Err(ModelError::NestedDuplicate {
                tag: span.tag_name(),
                start: span.start,
            });
        }
        open.push(span);
    }
    Ok(())
}

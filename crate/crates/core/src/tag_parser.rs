//! Inline tag markup: `<T1>…</T1>`, `<c2>…</c2>`, `<p3>…</p3>`, `<t>…</t>`,
//! `<s>…</s>`.
//!
//! This is a fixed tag grammar, not XML. There are no attributes, entities or
//! self-closing tags. Anything between `<` and `>` that is not a recognized
//! tag stays in the plain text (with a warning when it looks like a tag).
//! Whitespace next to tags belongs to the plain text.

use serde::Serialize;
use thiserror::Error;

use crate::model::{AnnotatedDocument, ModelError, Span, TagKind};

const EXCERPT_CHARS: usize = 40;
const MAX_TAG_SHAPE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DiagnosticCode {
    UnclosedTag,
    UnexpectedClose,
    CrossingTags,
    BadTagName,
    DuplicateOpen,
    EmptySpan,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    /// Character offset into the raw input (after any byte-order mark).
    pub offset: usize,
    pub code: DiagnosticCode,
    pub message: String,
    pub excerpt: String,
}

impl ParseDiagnostic {
    fn new(chars: &[char], severity: Severity, offset: usize, code: DiagnosticCode, message: String) -> Self {
        let excerpt = chars[offset.min(chars.len())..].iter().take(EXCERPT_CHARS).collect();
        ParseDiagnostic {
            severity,
            offset,
            code,
            message,
            excerpt,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// Successful parse: the document plus any warnings.
#[derive(Debug, Clone)]
pub struct ParseOutput {
    pub document: AnnotatedDocument,
    pub warnings: Vec<ParseDiagnostic>,
}

/// Failed parse; holds every diagnostic, errors and warnings, in input order.
#[derive(Debug, Clone, Error)]
#[error("annotation for {annotator_id} has {} error(s)", self.errors().count())]
pub struct ParseFailure {
    pub annotator_id: String,
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl ParseFailure {
    pub fn errors(&self) -> impl Iterator<Item = &ParseDiagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct TagToken {
    kind: TagKind,
    id: Option<u32>,
    closing: bool,
    /// Length in chars, brackets included.
    len: usize,
}

/// Recognizes a grammar-conformant tag starting at `chars[pos]`.
fn recognize_tag(chars: &[char], pos: usize) -> Option<TagToken> {
    let mut i = pos;
    if chars.get(i) != Some(&'<') {
        return None;
    }
    i += 1;
    let closing = chars.get(i) == Some(&'/');
    if closing {
        i += 1;
    }
    let kind = TagKind::from_letter(*chars.get(i)?)?;
    i += 1;
    let digits_start = i;
    while chars.get(i).is_some_and(|c| c.is_ascii_digit()) {
        i += 1;
    }
    if chars.get(i) != Some(&'>') {
        return None;
    }
    let id = if i == digits_start {
        if kind.requires_id() {
            return None;
        }
        None
    } else {
        let digits: String = chars[digits_start..i].iter().collect();
        match digits.parse::<u32>() {
            Ok(0) | Err(_) => return None,
            Ok(n) => Some(n),
        }
    };
    Some(TagToken {
        kind,
        id,
        closing,
        len: i + 1 - pos,
    })
}

/// Length of a `<name>` / `</name>` shaped sequence that is not necessarily
/// grammar-conformant.
fn tag_shape_len(chars: &[char], pos: usize) -> Option<usize> {
    let mut i = pos + 1;
    if chars.get(i) == Some(&'/') {
        i += 1;
    }
    let name_start = i;
    while let Some(&c) = chars.get(i) {
        if c == '>' {
            break;
        }
        if c == '<' || c.is_whitespace() || i - name_start >= MAX_TAG_SHAPE {
            return None;
        }
        i += 1;
    }
    (chars.get(i) == Some(&'>') && i > name_start).then_some(i + 1 - pos)
}

/// Char offset of the first grammar-conformant tag in `text`, if any.
pub fn find_tag_markup(text: &str) -> Option<usize> {
    if !text.contains('<') {
        return None;
    }
    let chars: Vec<char> = text.chars().collect();
    (0..chars.len()).find(|&i| recognize_tag(&chars, i).is_some())
}

struct OpenTag {
    kind: TagKind,
    id: Option<u32>,
    plain_start: usize,
    raw_offset: usize,
    seq: usize,
}

fn tag_label(kind: TagKind, id: Option<u32>) -> String {
    Span::new(kind, id, 0, 0).tag_name()
}

pub fn parse_annotation(raw: &str, annotator_id: &str) -> Result<ParseOutput, ParseFailure> {
    let raw = raw.strip_prefix('\u{feff}').unwrap_or(raw);
    let chars: Vec<char> = raw.chars().collect();
    let mut diagnostics = Vec::new();
    let mut plain = String::with_capacity(raw.len());
    // raw offset of every plain char
    let mut plain_to_raw: Vec<usize> = Vec::with_capacity(chars.len());
    let mut stack: Vec<OpenTag> = Vec::new();
    let mut closed: Vec<(usize, Span)> = Vec::new();
    let mut seq = 0;

    let mut pos = 0;
    while pos < chars.len() {
        let c = chars[pos];
        if c == '<' {
            if let Some(tag) = recognize_tag(&chars, pos) {
                let plain_pos = plain_to_raw.len();
                let label = tag_label(tag.kind, tag.id);
                if !tag.closing {
                    if stack.iter().any(|o| o.kind == tag.kind && o.id == tag.id) {
                        diagnostics.push(ParseDiagnostic::new(
                            &chars,
                            Severity::Error,
                            pos,
                            DiagnosticCode::DuplicateOpen,
                            format!("<{label}> opened while already open"),
                        ));
                    } else {
                        stack.push(OpenTag {
                            kind: tag.kind,
                            id: tag.id,
                            plain_start: plain_pos,
                            raw_offset: pos,
                            seq,
                        });
                        seq += 1;
                    }
                } else if stack.last().is_some_and(|o| o.kind == tag.kind && o.id == tag.id) {
                    let open = stack.pop().expect("checked non-empty");
                    if open.plain_start == plain_pos {
                        diagnostics.push(ParseDiagnostic::new(
                            &chars,
                            Severity::Error,
                            open.raw_offset,
                            DiagnosticCode::EmptySpan,
                            format!("<{label}> encloses no text"),
                        ));
                    } else {
                        closed.push((open.seq, Span::new(tag.kind, tag.id, open.plain_start, plain_pos)));
                    }
                } else if let Some(depth) = stack.iter().rposition(|o| o.kind == tag.kind && o.id == tag.id) {
                    let inner = &stack[stack.len() - 1];
                    diagnostics.push(ParseDiagnostic::new(
                        &chars,
                        Severity::Error,
                        pos,
                        DiagnosticCode::CrossingTags,
                        format!("</{label}> closes across open <{}>", tag_label(inner.kind, inner.id)),
                    ));
                    stack.remove(depth);
                } else {
                    diagnostics.push(ParseDiagnostic::new(
                        &chars,
                        Severity::Error,
                        pos,
                        DiagnosticCode::UnexpectedClose,
                        format!("</{label}> has no matching open tag"),
                    ));
                }
                pos += tag.len;
                continue;
            }
            if let Some(len) = tag_shape_len(&chars, pos) {
                let shape: String = chars[pos..pos + len].iter().collect();
                diagnostics.push(ParseDiagnostic::new(
                    &chars,
                    Severity::Warning,
                    pos,
                    DiagnosticCode::BadTagName,
                    format!("{shape} is not a recognized tag; kept as text"),
                ));
            }
        }
        plain.push(c);
        plain_to_raw.push(pos);
        pos += 1;
    }

    for open in &stack {
        diagnostics.push(ParseDiagnostic::new(
            &chars,
            Severity::Error,
            open.raw_offset,
            DiagnosticCode::UnclosedTag,
            format!("<{}> is never closed", tag_label(open.kind, open.id)),
        ));
    }
    diagnostics.sort_by_key(|d| d.offset);

    if diagnostics.iter().any(ParseDiagnostic::is_error) {
        return Err(ParseFailure {
            annotator_id: annotator_id.to_string(),
            diagnostics,
        });
    }

    closed.sort_by_key(|(seq, _)| *seq);
    let spans = closed.into_iter().map(|(_, s)| s).collect();
    match AnnotatedDocument::new(annotator_id, plain, spans) {
        Ok(document) => Ok(ParseOutput {
            document,
            warnings: diagnostics,
        }),
        Err(ModelError::MarkupInText { offset }) => {
            let raw_offset = plain_to_raw[offset];
            diagnostics.push(ParseDiagnostic::new(
                &chars,
                Severity::Error,
                raw_offset,
                DiagnosticCode::BadTagName,
                "removing tags leaves tag markup in the text".to_string(),
            ));
            diagnostics.sort_by_key(|d| d.offset);
            Err(ParseFailure {
                annotator_id: annotator_id.to_string(),
                diagnostics,
            })
        }
        // stack discipline guarantees well-nested, non-empty, in-range spans
        Err(other) => unreachable!("parser produced an invalid document: {other}"),
    }
}

/// Re-inserts tags into the plain text. Spans sharing a start open outermost
/// first (longer first, then kind order `T c p t s`) and close in reverse.
pub fn serialize(doc: &AnnotatedDocument) -> String {
    let spans = doc.spans();
    // (char position, closes-before-opens, order within that group, tag text)
    let mut events: Vec<(usize, u8, isize, String)> = Vec::with_capacity(spans.len() * 2);
    for (i, span) in spans.iter().enumerate() {
        let name = span.tag_name();
        events.push((span.start, 1, i as isize, format!("<{name}>")));
        events.push((span.end, 0, -(i as isize), format!("</{name}>")));
    }
    events.sort();

    let mut out = String::with_capacity(doc.plain_text().len() + events.len() * 5);
    let mut next = events.iter().peekable();
    for (pos, c) in doc.plain_text().chars().enumerate() {
        while let Some(ev) = next.next_if(|ev| ev.0 == pos) {
            out.push_str(&ev.3);
        }
        out.push(c);
    }
    for ev in next {
        out.push_str(&ev.3);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Divergence {
    pub first: String,
    pub second: String,
    /// Char offset of the first differing character in line-ending
    /// normalized text.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnnotatorLength {
    pub annotator_id: String,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlignmentReport {
    pub aligned: bool,
    pub first_divergence: Option<Divergence>,
    pub lengths: Vec<AnnotatorLength>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlignmentError {
    #[error("alignment needs at least 2 documents, got {0}")]
    TooFewDocuments(usize),
}

fn normalized_chars(text: &str) -> Vec<char> {
    let mut out = Vec::with_capacity(text.len());
    let mut prev_cr = false;
    for c in text.chars() {
        match c {
            '\r' => out.push('\n'),
            '\n' if prev_cr => {}
            _ => out.push(c),
        }
        prev_cr = c == '\r';
    }
    out
}

/// Checks that every document carries the same plain text, treating CRLF and
/// CR as LF. The first divergent pair is the first `(i, j)`, `i < j`, in input
/// order whose texts differ.
pub fn validate_alignment(docs: &[AnnotatedDocument]) -> Result<AlignmentReport, AlignmentError> {
    if docs.len() < 2 {
        return Err(AlignmentError::TooFewDocuments(docs.len()));
    }
    let texts: Vec<Vec<char>> = docs.iter().map(|d| normalized_chars(d.plain_text())).collect();
    let mut first_divergence = None;
    'pairs: for i in 0..texts.len() {
        for j in i + 1..texts.len() {
            let (a, b) = (&texts[i], &texts[j]);
            if a != b {
                let offset = a.iter().zip(b).position(|(x, y)| x != y).unwrap_or(a.len().min(b.len()));
                first_divergence = Some(Divergence {
                    first: docs[i].annotator_id().to_string(),
                    second: docs[j].annotator_id().to_string(),
                    offset,
                });
                break 'pairs;
            }
        }
    }
    Ok(AlignmentReport {
        aligned: first_divergence.is_none(),
        first_divergence,
        lengths: docs
            .iter()
            .map(|d| AnnotatorLength {
                annotator_id: d.annotator_id().to_string(),
                length: d.char_len(),
            })
            .collect(),
    })
}

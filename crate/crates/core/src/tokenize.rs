//! Language-neutral tokenization over Unicode character classes.
//!
//! Whitespace separates tokens. Under the default options every maximal run
//! of punctuation (general category `P*`) is a token of its own, so `"Room D."`
//! yields `Room`, `D`, `.`. No stemming or lemmatization is applied.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use unicode_general_category::{get_general_category, GeneralCategory};

use crate::model::{AnnotatedDocument, ModelError, Span};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub index: usize,
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PunctuationMode {
    /// Punctuation runs become their own tokens.
    #[default]
    Split,
    /// Punctuation stays attached to adjacent letters; only whitespace splits.
    Attach,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizerOptions {
    #[serde(default)]
    pub punctuation: PunctuationMode,
}

pub fn is_punctuation(c: char) -> bool {
    matches!(
        get_general_category(c),
        GeneralCategory::ConnectorPunctuation
            | GeneralCategory::DashPunctuation
            | GeneralCategory::OpenPunctuation
            | GeneralCategory::ClosePunctuation
            | GeneralCategory::InitialPunctuation
            | GeneralCategory::FinalPunctuation
            | GeneralCategory::OtherPunctuation
    )
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Space,
    Punct,
    Word,
}

fn classify(c: char, options: TokenizerOptions) -> Class {
    if c.is_whitespace() {
        Class::Space
    } else if options.punctuation == PunctuationMode::Split && is_punctuation(c) {
        Class::Punct
    } else {
        Class::Word
    }
}

pub fn tokenize(text: &str) -> Vec<Token> {
    tokenize_with(text, TokenizerOptions::default())
}

pub fn tokenize_with(text: &str, options: TokenizerOptions) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut current: Option<(Class, usize, usize)> = None; // class, char start, byte start
    let push = |tokens: &mut Vec<Token>, start: usize, end: usize, surface: &str| {
        tokens.push(Token {
            index: tokens.len(),
            start,
            end,
            surface: surface.to_string(),
        });
    };
    let mut char_pos = 0;
    for (byte_pos, c) in text.char_indices() {
        let class = classify(c, options);
        match current {
            Some((cur, _, _)) if cur == class => {}
            Some((cur, start, byte_start)) => {
                if cur != Class::Space {
                    push(&mut tokens, start, char_pos, &text[byte_start..byte_pos]);
                }
                current = Some((class, char_pos, byte_pos));
            }
            None => current = Some((class, char_pos, byte_pos)),
        }
        char_pos += 1;
    }
    if let Some((cur, start, byte_start)) = current {
        if cur != Class::Space {
            push(&mut tokens, start, char_pos, &text[byte_start..]);
        }
    }
    tokens
}

/// Indices of tokens overlapping `span` by at least one character.
pub fn span_tokens(
    doc: &AnnotatedDocument,
    tokens: &[Token],
    span: &Span,
) -> Result<BTreeSet<usize>, ModelError> {
    if span.start >= span.end || span.end > doc.char_len() {
        return Err(ModelError::OffsetOutOfRange {
            tag: span.tag_name(),
            start: span.start,
            end: span.end,
            len: doc.char_len(),
        });
    }
    Ok(tokens_in_range(tokens, span.start, span.end).collect())
}

/// Tokens overlapping `[start, end)`; `tokens` must be sorted by offset.
pub(crate) fn tokens_in_range(
    tokens: &[Token],
    start: usize,
    end: usize,
) -> impl Iterator<Item = usize> + '_ {
    let first = tokens.partition_point(|t| t.end <= start);
    tokens[first..]
        .iter()
        .take_while(move |t| t.start < end)
        .map(|t| t.index)
}

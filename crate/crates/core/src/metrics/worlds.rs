//! Cross-annotator text-world matching by minimum edit distance.

use rayon::prelude::*;
use serde::Serialize;

use super::edit_distance::{levenshtein, levenshtein_capped};
use super::MetricsError;
use crate::model::{AnnotatedDocument, TagKind};
use crate::Exec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct WorldMatch {
    pub source_ordinal: usize,
    pub target_ordinal: usize,
    /// Minimum edit distance from the source stretch to any target stretch.
    pub distance: usize,
    pub ordinal_divergence: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DivergencePoint {
    pub distance: usize,
    pub ordinal_divergence: usize,
}

fn stretches(doc: &AnnotatedDocument) -> Result<Vec<Vec<char>>, MetricsError> {
    let out: Vec<Vec<char>> = doc
        .spans_of(TagKind::TextWorld)
        .map(|s| doc.span_text(s).chars().collect())
        .collect();
    if out.is_empty() {
        return Err(MetricsError::NoTextWorlds {
            annotator: doc.annotator_id().to_string(),
        });
    }
    Ok(out)
}

pub fn match_worlds(doc_a: &AnnotatedDocument, doc_b: &AnnotatedDocument) -> Result<Vec<WorldMatch>, MetricsError> {
    match_worlds_with(doc_a, doc_b, Exec::Parallel)
}

/// For every text-world stretch of `doc_a`, in ordinal order, the stretch of
/// `doc_b` at minimum edit distance.
///
/// Several sources may match the same target. Ties go to the smaller
/// `|i - j|`, then the smaller target ordinal. Targets are visited in exactly
/// that order with the cap set just below the best distance so far, so a
/// later candidate replaces the current best only when strictly closer.
pub fn match_worlds_with(
    doc_a: &AnnotatedDocument,
    doc_b: &AnnotatedDocument,
    exec: Exec,
) -> Result<Vec<WorldMatch>, MetricsError> {
    let sources = stretches(doc_a)?;
    let targets = stretches(doc_b)?;
    let best_for = |i: usize| -> WorldMatch {
        let source = &sources[i];
        let mut order: Vec<usize> = (0..targets.len()).collect();
        order.sort_by_key(|&j| (i.abs_diff(j), j));
        let mut best: Option<(usize, usize)> = None;
        for j in order {
            let found = match best {
                None => Some(levenshtein(source, &targets[j])),
                Some((0, _)) => break,
                Some((d, _)) => levenshtein_capped(source, &targets[j], d - 1),
            };
            if let Some(d) = found {
                best = Some((d, j));
            }
        }
        let (distance, j) = best.expect("at least one target stretch");
        WorldMatch {
            source_ordinal: i + 1,
            target_ordinal: j + 1,
            distance,
            ordinal_divergence: i.abs_diff(j),
        }
    };
    Ok(match exec {
        Exec::Serial => (0..sources.len()).map(best_for).collect(),
        Exec::Parallel => (0..sources.len()).into_par_iter().map(best_for).collect(),
    })
}

/// Matches sorted by distance (stable), paired with `|source - target|`.
pub fn ordinal_divergence_series(matches: &[WorldMatch]) -> Vec<DivergencePoint> {
    let mut sorted = matches.to_vec();
    sorted.sort_by_key(|m| m.distance);
    sorted
        .into_iter()
        .map(|m| DivergencePoint {
            distance: m.distance,
            ordinal_divergence: m.ordinal_divergence,
        })
        .collect()
}

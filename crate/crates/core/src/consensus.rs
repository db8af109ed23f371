//! Fuzzy aggregation of several annotations.
//!
//! A token's membership degree in a kind is the share of annotators whose
//! spans of that kind overlap it. Kinds are independent, so a token can be
//! both fairly "character" and fairly "place". Thresholding the degrees gives
//! a crisp consensus as runs of consecutive tokens.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::corpus::Corpus;
use crate::metrics::jaccard;
use crate::model::TagKind;
use crate::Exec;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConsensusError {
    #[error("threshold {0} is outside (0, 1]")]
    ThresholdOutOfRange(f64),
}

/// Per kind, per token: how many annotators tagged the token with that kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzyAnnotation {
    num_annotators: usize,
    votes: [Vec<usize>; 5],
}

impl FuzzyAnnotation {
    pub fn num_annotators(&self) -> usize {
        self.num_annotators
    }

    pub fn token_count(&self) -> usize {
        self.votes[0].len()
    }

    /// Number of annotators tagging `token` with `kind`.
    pub fn votes(&self, kind: TagKind, token: usize) -> usize {
        self.votes[kind.index()][token]
    }

    pub fn degree(&self, kind: TagKind, token: usize) -> f64 {
        self.votes(kind, token) as f64 / self.num_annotators as f64
    }

    pub fn degrees(&self, kind: TagKind) -> Vec<f64> {
        (0..self.token_count()).map(|t| self.degree(kind, t)).collect()
    }
}

pub fn fuzzy_membership(corpus: &Corpus) -> FuzzyAnnotation {
    fuzzy_membership_with(corpus, Exec::Parallel)
}

pub fn fuzzy_membership_with(corpus: &Corpus, exec: Exec) -> FuzzyAnnotation {
    let per_kind = |kind: TagKind| {
        let mut votes = vec![0usize; corpus.tokens().len()];
        for d in 0..corpus.len() {
            for t in corpus.coverage(d, kind) {
                votes[t] += 1;
            }
        }
        votes
    };
    let mut columns: Vec<Vec<usize>> = match exec {
        Exec::Serial => TagKind::ALL.iter().map(|&k| per_kind(k)).collect(),
        Exec::Parallel => TagKind::ALL.par_iter().map(|&k| per_kind(k)).collect(),
    };
    let votes = std::array::from_fn(|_| columns.remove(0));
    FuzzyAnnotation {
        num_annotators: corpus.len(),
        votes,
    }
}

/// Consecutive token indices `first..=last`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TokenRun {
    pub first: usize,
    pub last: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrispConsensus {
    pub threshold: f64,
    runs: [Vec<TokenRun>; 5],
}

impl CrispConsensus {
    pub fn runs(&self, kind: TagKind) -> &[TokenRun] {
        &self.runs[kind.index()]
    }

    pub fn tokens(&self, kind: TagKind) -> BTreeSet<usize> {
        self.runs(kind).iter().flat_map(|r| r.first..=r.last).collect()
    }
}

/// Maximal runs of tokens whose degree is at least `threshold`, per kind.
pub fn crisp_consensus(fuzzy: &FuzzyAnnotation, threshold: f64) -> Result<CrispConsensus, ConsensusError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(ConsensusError::ThresholdOutOfRange(threshold));
    }
    let runs = std::array::from_fn(|k| {
        let kind = TagKind::ALL[k];
        let mut runs: Vec<TokenRun> = Vec::new();
        for t in 0..fuzzy.token_count() {
            if fuzzy.degree(kind, t) < threshold {
                continue;
            }
            match runs.last_mut() {
                Some(run) if run.last + 1 == t => run.last = t,
                _ => runs.push(TokenRun { first: t, last: t }),
            }
        }
        runs
    });
    Ok(CrispConsensus { threshold, runs })
}

/// Jaccard between the tokens one annotator tagged with `kind` and the
/// consensus tokens of that kind.
pub fn annotator_vs_consensus(corpus: &Corpus, annotator: usize, consensus: &CrispConsensus, kind: TagKind) -> f64 {
    jaccard(&corpus.coverage(annotator, kind), &consensus.tokens(kind))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AnnotatedDocument, Span};
    use crate::tokenize::TokenizerOptions;

    const TEXT: &str = "Quail walked across the valleys of Mars";

    fn corpus(spans_per_annotator: &[Vec<Span>]) -> Corpus {
        let docs = spans_per_annotator
            .iter()
            .enumerate()
            .map(|(i, spans)| AnnotatedDocument::new((i + 1).to_string(), TEXT, spans.clone()).unwrap())
            .collect();
        Corpus::new(docs, TokenizerOptions::default()).unwrap()
    }

    fn fuzzy_from(votes: &[usize], n: usize) -> FuzzyAnnotation {
        let mut columns: [Vec<usize>; 5] = Default::default();
        for c in &mut columns {
            *c = vec![0; votes.len()];
        }
        columns[TagKind::Place.index()] = votes.to_vec();
        FuzzyAnnotation { num_annotators: n, votes: columns }
    }

    #[test]
    fn unanimous_and_half_degrees() {
        let quail = Span::new(TagKind::Character, Some(1), 0, 5);
        let valleys = Span::new(TagKind::Place, Some(2), 24, 31);
        let annotators: Vec<Vec<Span>> = (0..6)
            .map(|i| if i % 2 == 0 { vec![quail.clone(), valleys.clone()] } else { vec![quail.clone()] })
            .collect();
        let fuzzy = fuzzy_membership(&corpus(&annotators));
        assert_eq!(fuzzy.degree(TagKind::Character, 0), 1.0);
        assert_eq!(fuzzy.degree(TagKind::Place, 4), 0.5);
        for kind in TagKind::ALL {
            assert_eq!(fuzzy.degree(kind, 1), 0.0);
        }
    }

    #[test]
    fn run_splitting() {
        // degrees [1, 1, 0.5, 1]
        let fuzzy = fuzzy_from(&[2, 2, 1, 2], 2);
        let crisp = crisp_consensus(&fuzzy, 0.6).unwrap();
        assert_eq!(crisp.runs(TagKind::Place), [TokenRun { first: 0, last: 1 }, TokenRun { first: 3, last: 3 }]);
        let all = crisp_consensus(&fuzzy, 0.5).unwrap();
        assert_eq!(all.runs(TagKind::Place), [TokenRun { first: 0, last: 3 }]);
        assert!(crisp.runs(TagKind::Character).is_empty());
    }

    #[test]
    fn unanimity_threshold_and_above_all() {
        let fuzzy = fuzzy_from(&[3, 2, 3, 0], 3);
        let crisp = crisp_consensus(&fuzzy, 1.0).unwrap();
        assert_eq!(crisp.tokens(TagKind::Place), BTreeSet::from([0, 2]));
        let none = crisp_consensus(&fuzzy_from(&[1, 2, 0], 3), 0.9).unwrap();
        assert!(none.runs(TagKind::Place).is_empty());
    }

    #[test]
    fn threshold_range() {
        let fuzzy = fuzzy_from(&[1], 2);
        for bad in [0.0, -0.1, 1.01, f64::NAN] {
            assert!(crisp_consensus(&fuzzy, bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn annotator_scores_against_consensus() {
        // tokens: Quail walked across the valleys of Mars (0..=6)
        let wide = Span::new(TagKind::Place, Some(1), 24, 39); // valleys of Mars
        let narrow = Span::new(TagKind::Place, Some(1), 35, 39); // Mars
        let c = corpus(&[vec![wide.clone()], vec![wide], vec![narrow], vec![]]);
        let crisp = crisp_consensus(&fuzzy_membership(&c), 0.5).unwrap();
        assert_eq!(crisp.tokens(TagKind::Place), BTreeSet::from([4, 5, 6]));
        assert_eq!(annotator_vs_consensus(&c, 0, &crisp, TagKind::Place), 1.0);
        assert_eq!(annotator_vs_consensus(&c, 2, &crisp, TagKind::Place), 1.0 / 3.0);
        assert_eq!(annotator_vs_consensus(&c, 3, &crisp, TagKind::Place), 0.0);
    }

    #[test]
    fn half_coverage_scores_half() {
        // consensus covers tokens 0..=3, annotator 3 covers 0..=1 only
        let all = Span::new(TagKind::TextWorld, Some(1), 0, 23);
        let half = Span::new(TagKind::TextWorld, Some(1), 0, 12);
        let c = corpus(&[vec![all.clone()], vec![all], vec![half]]);
        let crisp = crisp_consensus(&fuzzy_membership(&c), 0.6).unwrap();
        assert_eq!(crisp.tokens(TagKind::TextWorld).len(), 4);
        assert_eq!(annotator_vs_consensus(&c, 2, &crisp, TagKind::TextWorld), 0.5);
    }

    #[test]
    fn serial_equals_parallel() {
        let c = corpus(&[
            vec![Span::new(TagKind::Character, Some(1), 0, 5)],
            vec![Span::new(TagKind::Time, None, 6, 12)],
        ]);
        assert_eq!(fuzzy_membership_with(&c, Exec::Serial), fuzzy_membership_with(&c, Exec::Parallel));
    }
}

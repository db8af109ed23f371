use serde::Serialize;

use super::MetricsError;
use crate::model::{AnnotatedDocument, TagKind};

/// Median of a sample as its two middle values; both equal for odd sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MedianPair {
    pub lower: usize,
    pub upper: usize,
}

impl MedianPair {
    /// Twice the midpoint, kept integral.
    pub fn doubled_midpoint(self) -> usize {
        self.lower + self.upper
    }

    pub fn midpoint(self) -> f64 {
        self.doubled_midpoint() as f64 / 2.0
    }
}

pub fn median_pair(values: &[usize]) -> Option<MedianPair> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    let n = v.len();
    let (_, &mut upper, _) = v.select_nth_unstable(n / 2);
    let lower = if n % 2 == 1 {
        upper
    } else {
        *v[..n / 2].iter().max().expect("even n >= 2")
    };
    Some(MedianPair { lower, upper })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnnotatorCounts {
    pub annotator_id: String,
    pub text_worlds: usize,
    pub switches: usize,
    pub characters: usize,
    pub places: usize,
    pub times: usize,
}

impl AnnotatorCounts {
    pub fn of(doc: &AnnotatedDocument) -> AnnotatorCounts {
        AnnotatorCounts {
            annotator_id: doc.annotator_id().to_string(),
            text_worlds: doc.count(TagKind::TextWorld),
            switches: doc.count(TagKind::Switch),
            characters: doc.count(TagKind::Character),
            places: doc.count(TagKind::Place),
            times: doc.count(TagKind::Time),
        }
    }

    pub fn get(&self, kind: TagKind) -> usize {
        match kind {
            TagKind::TextWorld => self.text_worlds,
            TagKind::Switch => self.switches,
            TagKind::Character => self.characters,
            TagKind::Place => self.places,
            TagKind::Time => self.times,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ColumnMedians {
    pub text_worlds: MedianPair,
    pub switches: MedianPair,
    pub characters: MedianPair,
    pub places: MedianPair,
    pub times: MedianPair,
}

impl ColumnMedians {
    pub fn get(&self, kind: TagKind) -> MedianPair {
        match kind {
            TagKind::TextWorld => self.text_worlds,
            TagKind::Switch => self.switches,
            TagKind::Character => self.characters,
            TagKind::Place => self.places,
            TagKind::Time => self.times,
        }
    }
}

/// Per-annotator span counts by kind with column medians.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountSummary {
    pub annotators: Vec<AnnotatorCounts>,
    pub medians: ColumnMedians,
}

/// Column order of the summary table.
pub const COUNT_COLUMNS: [TagKind; 5] = [
    TagKind::TextWorld,
    TagKind::Switch,
    TagKind::Character,
    TagKind::Place,
    TagKind::Time,
];

impl CountSummary {
    pub fn from_counts(annotators: Vec<AnnotatorCounts>) -> Result<CountSummary, MetricsError> {
        if annotators.is_empty() {
            return Err(MetricsError::EmptyInput);
        }
        let column = |kind: TagKind| {
            let values: Vec<usize> = annotators.iter().map(|a| a.get(kind)).collect();
            median_pair(&values).expect("non-empty")
        };
        let medians = ColumnMedians {
            text_worlds: column(TagKind::TextWorld),
            switches: column(TagKind::Switch),
            characters: column(TagKind::Character),
            places: column(TagKind::Place),
            times: column(TagKind::Time),
        };
        Ok(CountSummary { annotators, medians })
    }
}

pub fn count_summary(docs: &[AnnotatedDocument]) -> Result<CountSummary, MetricsError> {
    CountSummary::from_counts(docs.iter().map(AnnotatorCounts::of).collect())
}

/// The `k` annotators whose text-world count is closest to the median
/// midpoint, nearest first; ties go to the earlier annotator.
pub fn select_median_annotations(docs: &[AnnotatedDocument], k: usize) -> Result<Vec<String>, MetricsError> {
    if k == 0 || k > docs.len() {
        return Err(MetricsError::KOutOfRange { k, n: docs.len() });
    }
    let summary = count_summary(docs)?;
    let doubled_mid = summary.medians.text_worlds.doubled_midpoint();
    let mut ranked: Vec<(usize, usize)> = summary
        .annotators
        .iter()
        .enumerate()
        .map(|(i, a)| ((2 * a.text_worlds).abs_diff(doubled_mid), i))
        .collect();
    ranked.sort();
    Ok(ranked
        .into_iter()
        .take(k)
        .map(|(_, i)| summary.annotators[i].annotator_id.clone())
        .collect())
}

//! Quantitative comparison of annotations: world matching, element
//! agreement, count summaries, and switch agreement.

mod counts;
mod edit_distance;
mod elements;
mod switches;
mod worlds;

use thiserror::Error;

use crate::model::TagKind;

pub use counts::{
    count_summary, median_pair, select_median_annotations, AnnotatorCounts, ColumnMedians, CountSummary, MedianPair,
    COUNT_COLUMNS,
};
pub use edit_distance::{edit_distance, levenshtein, levenshtein_capped, ExceedsCap};
pub use elements::{align_elements, jaccard, mean_jaccard, ElementAlignment, ElementMember, PairScore, SetMode};
pub use switches::{switch_agreement, AgreementBin, PosCount, PosError, PosTable, SwitchAgreement, SwitchSite, UNTAGGED};
pub use worlds::{match_worlds, match_worlds_with, ordinal_divergence_series, DivergencePoint, WorldMatch};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("annotator {annotator} has no text-world spans")]
    NoTextWorlds { annotator: String },
    #[error("element alignment supports character and place, not {0}")]
    UnsupportedKind(TagKind),
    #[error("no documents given")]
    EmptyInput,
    #[error("k = {k} is outside 1..={n}")]
    KOutOfRange { k: usize, n: usize },
}

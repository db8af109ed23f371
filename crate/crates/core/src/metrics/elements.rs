//! Element-level agreement: Jaccard overlap of the token material each
//! annotator tagged as one character or place.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::corpus::Corpus;
use crate::model::{Span, TagKind};

/// `|A ∩ B| / (|A| + |B| - |A ∩ B|)`, with two empty sets scoring 1.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let common = a.intersection(b).count();
    let union = a.len() + b.len() - common;
    if union == 0 {
        1.0
    } else {
        common as f64 / union as f64
    }
}

/// Sum of pairwise values divided by the number of pairs.
pub fn mean_jaccard(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// What an element's member set is built from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetMode {
    /// Token indices into the shared text.
    #[default]
    Positions,
    /// Distinct lowercased token surfaces.
    Forms,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementMember {
    pub annotator_id: String,
    /// Tag as written, e.g. `c4`; unnumbered spans are labelled by kind
    /// letter and ordinal, e.g. `c#3`.
    pub element: String,
    pub tokens: BTreeSet<usize>,
    pub forms: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairScore {
    pub first: String,
    pub second: String,
    pub j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementAlignment {
    pub kind: TagKind,
    /// Text of the earliest span among the members.
    pub label: String,
    /// One entry per annotator in corpus order; `None` when that annotator
    /// has no element in this cluster.
    pub members: Vec<Option<ElementMember>>,
    /// Every annotator pair `(i, j)`, `i < j`, in corpus order.
    pub pairwise: Vec<PairScore>,
    pub mean_j: f64,
}

struct Element<'a> {
    doc: usize,
    spans: Vec<&'a Span>,
    member: ElementMember,
}

fn collect_elements<'a>(corpus: &'a Corpus, kind: TagKind) -> Vec<Element<'a>> {
    let mut out: Vec<Element<'a>> = Vec::new();
    for (d, doc) in corpus.docs().iter().enumerate() {
        let first_of_doc = out.len();
        for span in doc.spans_of(kind) {
            let existing = span
                .element_id
                .and_then(|id| out[first_of_doc..].iter().position(|e| e.spans[0].element_id == Some(id)));
            match existing {
                Some(k) => out[first_of_doc + k].spans.push(span),
                None => {
                    let element = match span.element_id {
                        Some(_) => span.tag_name(),
                        None => format!("{}#{}", kind.letter(), span.ordinal),
                    };
                    out.push(Element {
                        doc: d,
                        spans: vec![span],
                        member: ElementMember {
                            annotator_id: doc.annotator_id().to_string(),
                            element,
                            tokens: BTreeSet::new(),
                            forms: BTreeSet::new(),
                        },
                    });
                }
            }
        }
    }
    for element in &mut out {
        for span in &element.spans {
            element.member.tokens.extend(corpus.tokens_between(span.start, span.end));
        }
        element.member.forms = element
            .member
            .tokens
            .iter()
            .map(|&t| corpus.tokens()[t].surface.to_lowercase())
            .collect();
    }
    out
}

/// Identifies each character or place across annotators and scores every
/// annotator pair on it.
///
/// Element ids are not comparable across annotators, so elements are
/// clustered greedily: all cross-annotator element pairs with positive
/// positional Jaccard are taken in descending order of that value, and each
/// pair merges its two clusters unless they already hold an element from the
/// same annotator. Elements left alone form single-member clusters. Within a
/// cluster, pairs where either annotator has no member score 0.
pub fn align_elements(corpus: &Corpus, kind: TagKind, mode: SetMode) -> Result<Vec<ElementAlignment>, MetricsError> {
    if !matches!(kind, TagKind::Character | TagKind::Place) {
        return Err(MetricsError::UnsupportedKind(kind));
    }
    let n = corpus.len();
    let elements = collect_elements(corpus, kind);

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for a in 0..elements.len() {
        for b in a + 1..elements.len() {
            if elements[a].doc == elements[b].doc {
                continue;
            }
            let j = jaccard(&elements[a].member.tokens, &elements[b].member.tokens);
            if j > 0.0 {
                candidates.push((j, a, b));
            }
        }
    }
    // elements are numbered annotator-major, so index order is the tie-break
    candidates.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut cluster_of: Vec<usize> = (0..elements.len()).collect();
    let mut clusters: Vec<Vec<Option<usize>>> = elements
        .iter()
        .enumerate()
        .map(|(e, el)| {
            let mut slots = vec![None; n];
            slots[el.doc] = Some(e);
            slots
        })
        .collect();
    for (_, a, b) in candidates {
        let (ca, cb) = (cluster_of[a], cluster_of[b]);
        if ca == cb {
            continue;
        }
        let clash = clusters[ca].iter().zip(&clusters[cb]).any(|(x, y)| x.is_some() && y.is_some());
        if clash {
            continue;
        }
        let moved = std::mem::take(&mut clusters[cb]);
        for (slot, e) in moved.into_iter().enumerate() {
            if let Some(e) = e {
                clusters[ca][slot] = Some(e);
                cluster_of[e] = ca;
            }
        }
    }

    let mut alignments: Vec<(usize, usize, ElementAlignment)> = Vec::new();
    for slots in &clusters {
        // merged-away clusters were emptied
        if slots.is_empty() {
            continue;
        }
        let members: Vec<Option<&Element>> = slots.iter().map(|s| s.map(|e| &elements[e])).collect();
        let mut pairwise = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for k in i + 1..n {
                let j = match (members[i], members[k]) {
                    (Some(x), Some(y)) => match mode {
                        SetMode::Positions => jaccard(&x.member.tokens, &y.member.tokens),
                        SetMode::Forms => jaccard(&x.member.forms, &y.member.forms),
                    },
                    _ => 0.0,
                };
                pairwise.push(PairScore {
                    first: corpus.docs()[i].annotator_id().to_string(),
                    second: corpus.docs()[k].annotator_id().to_string(),
                    j,
                });
            }
        }
        let values: Vec<f64> = pairwise.iter().map(|p| p.j).collect();
        let earliest = members
            .iter()
            .flatten()
            .map(|e| (e.spans[0].start, e.spans[0].end, e.doc))
            .min()
            .expect("cluster has a member");
        let doc = &corpus.docs()[earliest.2];
        let first_token = members
            .iter()
            .flatten()
            .filter_map(|e| e.member.tokens.first().copied())
            .min()
            .unwrap_or(usize::MAX);
        let first_element = slots.iter().flatten().copied().min().expect("cluster has a member");
        alignments.push((
            first_token,
            first_element,
            ElementAlignment {
                kind,
                label: doc.slice(earliest.0, earliest.1).trim().to_string(),
                members: members.iter().map(|m| m.map(|e| e.member.clone())).collect(),
                mean_j: mean_jaccard(&values),
                pairwise,
            },
        ));
    }
    alignments.sort_by_key(|(t, e, _)| (*t, *e));
    Ok(alignments.into_iter().map(|(_, _, a)| a).collect())
}

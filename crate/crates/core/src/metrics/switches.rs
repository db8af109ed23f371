//! Agreement on switch placement and the part-of-speech profile of switches.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::corpus::Corpus;
use crate::model::TagKind;
use crate::tokenize::Token;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("POS sidecar line {line}: {message}")]
pub struct PosError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct PosRow {
    line: usize,
    surface: String,
    tag: String,
}

/// Tab-separated `token_index<TAB>surface<TAB>POS` rows keyed by token index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PosTable {
    rows: BTreeMap<usize, PosRow>,
}

impl PosTable {
    pub fn parse(text: &str) -> Result<PosTable, PosError> {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        let mut rows = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let err = |message: String| PosError { line, message };
            let fields: Vec<&str> = raw.split('\t').collect();
            if fields.len() != 3 {
                return Err(err(format!("expected 3 tab-separated fields, found {}", fields.len())));
            }
            let index: usize = fields[0]
                .trim()
                .parse()
                .map_err(|_| err(format!("token index {:?} is not a non-negative integer", fields[0])))?;
            let tag = fields[2].trim();
            if tag.is_empty() {
                return Err(err("empty POS tag".to_string()));
            }
            let row = PosRow {
                line,
                surface: fields[1].to_string(),
                tag: tag.to_string(),
            };
            if let Some(prev) = rows.insert(index, row) {
                return Err(err(format!("token index {index} already given on line {}", prev.line)));
            }
        }
        Ok(PosTable { rows })
    }

    /// Rejects rows that point past the tokenization or disagree with the
    /// token surface.
    pub fn check_against(&self, tokens: &[Token]) -> Result<(), PosError> {
        for (&index, row) in &self.rows {
            let token = tokens.get(index).ok_or_else(|| PosError {
                line: row.line,
                message: format!("token index {index} out of range ({} tokens)", tokens.len()),
            })?;
            if token.surface != row.surface {
                return Err(PosError {
                    line: row.line,
                    message: format!("surface {:?} does not match token {index} {:?}", row.surface, token.surface),
                });
            }
        }
        Ok(())
    }

    pub fn tag(&self, index: usize) -> Option<&str> {
        self.rows.get(&index).map(|r| r.tag.as_str())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Label tallied for switch tokens missing from the sidecar.
pub const UNTAGGED: &str = "UNTAGGED";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SwitchSite {
    pub tokens: Vec<usize>,
    pub text: String,
    pub annotators: Vec<String>,
    pub agreement: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AgreementBin {
    pub level: usize,
    pub sites: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PosCount {
    pub tag: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SwitchAgreement {
    pub num_annotators: usize,
    pub sites: Vec<SwitchSite>,
    /// One bin per level `1..=num_annotators`, zeros included.
    pub histogram: Vec<AgreementBin>,
    pub pos_distribution: Option<Vec<PosCount>>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Groups switch spans that share a token (transitively) into sites and
/// counts how many annotators marked each site.
///
/// Switch spans covering no token are ignored. With a POS table, every
/// distinct token of every site is tallied once by its tag.
pub fn switch_agreement(corpus: &Corpus, pos: Option<&PosTable>) -> Result<SwitchAgreement, PosError> {
    if let Some(table) = pos {
        table.check_against(corpus.tokens())?;
    }
    let mut spans: Vec<(usize, BTreeSet<usize>)> = Vec::new();
    for (d, doc) in corpus.docs().iter().enumerate() {
        for span in doc.spans_of(TagKind::Switch) {
            let tokens = corpus.tokens_between(span.start, span.end);
            if !tokens.is_empty() {
                spans.push((d, tokens));
            }
        }
    }

    let mut parent: Vec<usize> = (0..spans.len()).collect();
    let mut owner: HashMap<usize, usize> = HashMap::new();
    for (s, (_, tokens)) in spans.iter().enumerate() {
        for &t in tokens {
            match owner.get(&t) {
                Some(&o) => {
                    let (a, b) = (find(&mut parent, o), find(&mut parent, s));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
                None => {
                    owner.insert(t, s);
                }
            }
        }
    }

    let mut groups: BTreeMap<usize, (BTreeSet<usize>, BTreeSet<usize>)> = BTreeMap::new();
    for (s, (d, tokens)) in spans.iter().enumerate() {
        let root = find(&mut parent, s);
        let entry = groups.entry(root).or_default();
        entry.0.extend(tokens);
        entry.1.insert(*d);
    }
    let mut sites: Vec<SwitchSite> = groups
        .into_values()
        .map(|(tokens, docs)| {
            let first = *tokens.first().expect("non-empty");
            let last = *tokens.last().expect("non-empty");
            SwitchSite {
                text: corpus.token_run_text(first, last).to_string(),
                tokens: tokens.into_iter().collect(),
                agreement: docs.len(),
                annotators: docs.into_iter().map(|d| corpus.docs()[d].annotator_id().to_string()).collect(),
            }
        })
        .collect();
    sites.sort_by_key(|s| s.tokens[0]);

    let n = corpus.len();
    let mut histogram: Vec<AgreementBin> = (1..=n).map(|level| AgreementBin { level, sites: 0 }).collect();
    for site in &sites {
        histogram[site.agreement - 1].sites += 1;
    }

    let pos_distribution = pos.map(|table| {
        let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
        for t in sites.iter().flat_map(|s| &s.tokens) {
            *tally.entry(table.tag(*t).unwrap_or(UNTAGGED)).or_default() += 1;
        }
        let mut counts: Vec<PosCount> = tally
            .into_iter()
            .map(|(tag, count)| PosCount { tag: tag.to_string(), count })
            .collect();
        counts.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.tag.cmp(&b.tag)));
        counts
    });

    Ok(SwitchAgreement {
        num_annotators: n,
        sites,
        histogram,
        pos_distribution,
    })
}

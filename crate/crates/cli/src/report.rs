//! Report envelope, per-command payloads, and their JSON / CSV renderings.
//!
//! Numbers are written at full precision unless a display rounding is
//! requested; both renderings round the same way.

use serde::Serialize;
use serde_json::Value;

use twt_core::metrics::{
    AgreementBin, CountSummary, DivergencePoint, MedianPair, PairScore, PosCount, SwitchSite, WorldMatch,
    COUNT_COLUMNS,
};
use twt_core::tag_parser::AlignmentReport;
use twt_core::TagKind;

use crate::manifest::FileDiagnostic;

pub const TOOL: &str = "twt";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub manifest_digest: String,
    pub command: &'static str,
    pub payload: Payload,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case")]
pub enum Payload {
    Validation(ValidationPayload),
    CountSummary(CountSummary),
    WorldMatches(MatchPayload),
    ElementAlignment(ElementsPayload),
    SwitchAgreement(SwitchesPayload),
    Consensus(ConsensusPayload),
    Selection(SelectPayload),
}

impl Payload {
    pub fn command(&self) -> &'static str {
        match self {
            Payload::Validation(_) => "validate",
            Payload::CountSummary(_) => "stats",
            Payload::WorldMatches(_) => "match",
            Payload::ElementAlignment(_) => "elements",
            Payload::SwitchAgreement(_) => "switches",
            Payload::Consensus(_) => "consensus",
            Payload::Selection(_) => "select",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DocumentSummary {
    pub annotator_id: String,
    pub path: String,
    pub characters: usize,
    pub spans: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationPayload {
    pub documents: Vec<DocumentSummary>,
    pub diagnostics: Vec<FileDiagnostic>,
    pub alignment: Option<AlignmentReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchPayload {
    pub source: String,
    pub target: String,
    pub matches: Vec<WorldMatch>,
    pub divergence_series: Vec<DivergencePoint>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ElementRow {
    pub label: String,
    /// Element tag per annotator, `None` where absent.
    pub members: Vec<Option<String>>,
    pub pairwise: Vec<PairScore>,
    pub mean_j: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ElementsPayload {
    pub kind: TagKind,
    pub mode: twt_core::metrics::SetMode,
    pub annotators: Vec<String>,
    pub elements: Vec<ElementRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SwitchesPayload {
    pub num_annotators: usize,
    pub histogram: Vec<AgreementBin>,
    pub sites: Vec<SwitchSite>,
    pub pos_distribution: Option<Vec<PosCount>>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KindValues {
    pub text_world: f64,
    pub character: f64,
    pub place: f64,
    pub time: f64,
    pub switch: f64,
}

impl KindValues {
    pub fn from_fn(mut f: impl FnMut(TagKind) -> f64) -> KindValues {
        KindValues {
            text_world: f(TagKind::TextWorld),
            character: f(TagKind::Character),
            place: f(TagKind::Place),
            time: f(TagKind::Time),
            switch: f(TagKind::Switch),
        }
    }

    fn values(&self) -> [f64; 5] {
        [self.text_world, self.character, self.place, self.time, self.switch]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TokenDegrees {
    pub index: usize,
    pub surface: String,
    pub degrees: KindValues,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRow {
    pub kind: TagKind,
    pub first: usize,
    pub last: usize,
    pub text: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnnotatorScore {
    pub annotator_id: String,
    pub jaccard: KindValues,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsensusPayload {
    pub threshold: f64,
    pub num_annotators: usize,
    pub token_count: usize,
    /// Tokens with a non-zero degree in at least one kind.
    pub tokens: Vec<TokenDegrees>,
    pub runs: Vec<RunRow>,
    pub annotator_vs_consensus: Vec<AnnotatorScore>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectedAnnotator {
    pub annotator_id: String,
    pub text_worlds: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectPayload {
    pub k: usize,
    pub median: MedianPair,
    pub midpoint: f64,
    pub selected: Vec<SelectedAnnotator>,
}

pub fn round_to(value: f64, digits: u32) -> f64 {
    let scale = 10f64.powi(digits as i32);
    (value * scale).round() / scale
}

fn round_value(value: &mut Value, digits: u32) {
    match value {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().and_then(|v| serde_json::Number::from_f64(round_to(v, digits))) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|v| round_value(v, digits)),
        Value::Object(map) => map.values_mut().for_each(|v| round_value(v, digits)),
        _ => {}
    }
}

impl Report {
    pub fn new(manifest_digest: String, payload: Payload) -> Report {
        Report {
            tool: TOOL,
            tool_version: TOOL_VERSION,
            manifest_digest,
            command: payload.command(),
            payload,
        }
    }

    pub fn to_json(&self, round: Option<u32>) -> String {
        let mut value = serde_json::to_value(self).expect("reports serialize");
        if let Some(digits) = round {
            round_value(&mut value, digits);
        }
        let mut out = serde_json::to_string_pretty(&value).expect("reports serialize");
        out.push('\n');
        out
    }

    /// Flat tables, one section per table, sections separated by a blank
    /// line. The first line is a `#` comment carrying the manifest digest.
    pub fn to_csv(&self, round: Option<u32>) -> String {
        let num = |v: f64| match round {
            Some(d) => format!("{}", round_to(v, d)),
            None => format!("{v}"),
        };
        let tables = self.tables(&num);
        let mut out = format!("# {} {} {} {}\n", self.tool, self.tool_version, self.command, self.manifest_digest);
        for (i, table) in tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let mut writer = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
            for row in table {
                writer.write_record(row).expect("in-memory write");
            }
            out.push_str(&String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8"));
        }
        out
    }

    fn tables(&self, num: &dyn Fn(f64) -> String) -> Vec<Vec<Vec<String>>> {
        let s = |v: &dyn ToString| v.to_string();
        let row = |cells: &[&str]| cells.iter().map(|c| c.to_string()).collect::<Vec<_>>();
        match &self.payload {
            Payload::Validation(p) => {
                let mut docs = vec![row(&["annotator_id", "path", "characters", "spans"])];
                docs.extend(p.documents.iter().map(|d| {
                    vec![d.annotator_id.clone(), d.path.clone(), s(&d.characters), s(&d.spans)]
                }));
                let mut diags = vec![row(&["annotator_id", "path", "severity", "offset", "code", "message", "excerpt"])];
                diags.extend(p.diagnostics.iter().map(|d| {
                    vec![
                        d.annotator_id.clone(),
                        d.path.clone(),
                        json_name(&d.diagnostic.severity),
                        s(&d.diagnostic.offset),
                        json_name(&d.diagnostic.code),
                        d.diagnostic.message.clone(),
                        d.diagnostic.excerpt.clone(),
                    ]
                }));
                let mut align = vec![row(&["aligned", "first", "second", "offset"])];
                if let Some(a) = &p.alignment {
                    let div = a.first_divergence.as_ref();
                    align.push(vec![
                        s(&a.aligned),
                        div.map(|d| d.first.clone()).unwrap_or_default(),
                        div.map(|d| d.second.clone()).unwrap_or_default(),
                        div.map(|d| d.offset.to_string()).unwrap_or_default(),
                    ]);
                }
                vec![docs, diags, align]
            }
            Payload::CountSummary(p) => {
                let mut header = vec!["annotator".to_string()];
                header.extend(COUNT_COLUMNS.iter().map(|k| k.name().to_string()));
                let mut table = vec![header];
                for a in &p.annotators {
                    let mut r = vec![a.annotator_id.clone()];
                    r.extend(COUNT_COLUMNS.iter().map(|&k| a.get(k).to_string()));
                    table.push(r);
                }
                let mut lower = vec!["median_lower".to_string()];
                let mut upper = vec!["median_upper".to_string()];
                for &k in &COUNT_COLUMNS {
                    lower.push(p.medians.get(k).lower.to_string());
                    upper.push(p.medians.get(k).upper.to_string());
                }
                table.push(lower);
                table.push(upper);
                vec![table]
            }
            Payload::WorldMatches(p) => {
                let mut matches = vec![row(&["source_ordinal", "l_min", "target_ordinal", "ordinal_divergence"])];
                matches.extend(p.matches.iter().map(|m| {
                    vec![s(&m.source_ordinal), s(&m.distance), s(&m.target_ordinal), s(&m.ordinal_divergence)]
                }));
                let mut series = vec![row(&["sorted_l_min", "abs_ordinal_difference"])];
                series.extend(p.divergence_series.iter().map(|d| vec![s(&d.distance), s(&d.ordinal_divergence)]));
                vec![matches, series]
            }
            Payload::ElementAlignment(p) => {
                let mut header = vec!["element".to_string(), "label".to_string()];
                header.extend(p.annotators.iter().map(|a| format!("tag_{a}")));
                if let Some(first) = p.elements.first() {
                    header.extend(first.pairwise.iter().map(|x| format!("({}, {})", x.first, x.second)));
                } else {
                    for (i, a) in p.annotators.iter().enumerate() {
                        for b in &p.annotators[i + 1..] {
                            header.push(format!("({a}, {b})"));
                        }
                    }
                }
                header.push("mean_j".to_string());
                let mut table = vec![header];
                for (i, e) in p.elements.iter().enumerate() {
                    let mut r = vec![(i + 1).to_string(), e.label.clone()];
                    r.extend(e.members.iter().map(|m| m.clone().unwrap_or_default()));
                    r.extend(e.pairwise.iter().map(|x| num(x.j)));
                    r.push(num(e.mean_j));
                    table.push(r);
                }
                vec![table]
            }
            Payload::SwitchAgreement(p) => {
                let mut hist = vec![row(&["agreement", "sites"])];
                hist.extend(p.histogram.iter().map(|b| vec![s(&b.level), s(&b.sites)]));
                let mut sites = vec![row(&["first_token", "last_token", "agreement", "annotators", "text"])];
                sites.extend(p.sites.iter().map(|x| {
                    vec![
                        s(&x.tokens[0]),
                        s(x.tokens.last().expect("non-empty site")),
                        s(&x.agreement),
                        x.annotators.join(" "),
                        x.text.clone(),
                    ]
                }));
                let mut tables = vec![hist, sites];
                if let Some(dist) = &p.pos_distribution {
                    let mut pos = vec![row(&["pos", "count"])];
                    pos.extend(dist.iter().map(|c| vec![c.tag.clone(), s(&c.count)]));
                    tables.push(pos);
                }
                tables
            }
            Payload::Consensus(p) => {
                let kinds: Vec<String> = TagKind::ALL.iter().map(|k| k.name().to_string()).collect();
                let mut header = vec!["token".to_string(), "surface".to_string()];
                header.extend(kinds.iter().cloned());
                let mut degrees = vec![header];
                for t in &p.tokens {
                    let mut r = vec![s(&t.index), t.surface.clone()];
                    r.extend(t.degrees.values().iter().map(|&v| num(v)));
                    degrees.push(r);
                }
                let mut runs = vec![row(&["kind", "first_token", "last_token", "text"])];
                runs.extend(
                    p.runs
                        .iter()
                        .map(|r| vec![r.kind.name().to_string(), s(&r.first), s(&r.last), r.text.clone()]),
                );
                let mut header = vec!["annotator".to_string()];
                header.extend(kinds);
                let mut scores = vec![header];
                for a in &p.annotator_vs_consensus {
                    let mut r = vec![a.annotator_id.clone()];
                    r.extend(a.jaccard.values().iter().map(|&v| num(v)));
                    scores.push(r);
                }
                vec![degrees, runs, scores]
            }
            Payload::Selection(p) => {
                let mut table = vec![row(&["rank", "annotator", "text_worlds", "distance_to_midpoint"])];
                table.extend(p.selected.iter().enumerate().map(|(i, a)| {
                    vec![s(&(i + 1)), a.annotator_id.clone(), s(&a.text_worlds), num(a.distance)]
                }));
                vec![table]
            }
        }
    }
}

/// The serde name of a unit enum value.
fn json_name<T: Serialize>(value: &T) -> String {
    match serde_json::to_value(value) {
        Ok(Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_is_presentation_only() {
        assert_eq!(round_to(0.7081, 2), 0.71);
        assert_eq!(round_to(1.0 / 3.0, 3), 0.333);
        let mut v = serde_json::json!({"a": 0.12345, "b": [2, 0.5561], "c": 7});
        round_value(&mut v, 2);
        assert_eq!(v, serde_json::json!({"a": 0.12, "b": [2, 0.56], "c": 7}));
    }
}

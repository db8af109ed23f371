//! Seeded synthetic corpus: a ~500-word narrative and six scripted annotators.
#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twt_core::tag_parser::serialize;
use twt_core::tokenize::{is_punctuation, tokenize};
use twt_core::{AnnotatedDocument, Span, TagKind};

const VERBS: &[&str] = &[
    "Walked", "Returned", "Remembered", "Waited", "Opened", "Left", "Watched", "Dreamed", "Called", "Entered",
    "Turned", "Paused",
];
const FILLER: &[&str] = &[
    "slowly", "the", "door", "a", "street", "memory", "quietly", "office", "window", "light", "voice", "again",
    "his", "her", "old", "long", "corridor", "trip", "grey", "morning", "chair", "desk", "face", "city", "ticket",
    "strange", "letter", "briefly", "home", "silence",
];
pub const CHARACTERS: &[&str] = &["Douglas Quail", "Kirsten", "McClane", "Shirley"];
pub const PLACES: &[&str] = &["Mars", "Luna", "Interplan", "the park"];
const TIMES: &[&str] = &["yesterday", "at dawn", "next week"];

#[derive(Debug, Clone, Copy)]
struct Mention {
    kind: TagKind,
    entity: usize,
    start: usize,
    end: usize,
}

#[derive(Debug, Clone, Copy)]
struct Sentence {
    start: usize,
    end: usize,
    verb_end: usize,
}

pub struct Synthetic {
    pub text: String,
    pub words: usize,
    pub docs: Vec<AnnotatedDocument>,
    pub pos: String,
}

struct Builder {
    text: String,
    len: usize,
}

impl Builder {
    fn push(&mut self, s: &str) -> (usize, usize) {
        let start = self.len;
        self.text.push_str(s);
        self.len += s.chars().count();
        (start, self.len)
    }
}

pub const WORLDS: usize = 20;
const SENTENCES: usize = 45;

type MentionRule<'a> = &'a dyn Fn(usize, &Mention) -> Option<(TagKind, Option<u32>)>;

/// Spans for one annotator given world start sentences and mention filters.
struct Variant<'a> {
    world_starts: Vec<usize>,
    keep_switch: &'a dyn Fn(usize) -> bool,
    mention: MentionRule<'a>,
}

fn annotate(id: &str, text: &str, sentences: &[Sentence], mentions: &[Mention], v: Variant<'_>) -> AnnotatedDocument {
    let mut spans = Vec::new();
    for (w, &first) in v.world_starts.iter().enumerate() {
        let last = v.world_starts.get(w + 1).map_or(sentences.len(), |&n| n) - 1;
        spans.push(Span::new(
            TagKind::TextWorld,
            Some(w as u32 + 1),
            sentences[first].start,
            sentences[last].end,
        ));
        if w > 0 && (v.keep_switch)(w) {
            let s = sentences[first];
            spans.push(Span::new(TagKind::Switch, None, s.start, s.verb_end));
        }
    }
    for (i, m) in mentions.iter().enumerate() {
        if let Some((kind, element_id)) = (v.mention)(i, m) {
            spans.push(Span::new(kind, element_id, m.start, m.end));
        }
    }
    AnnotatedDocument::new(id, text, spans).expect("synthetic spans nest")
}

fn default_mention(m: &Mention) -> Option<(TagKind, Option<u32>)> {
    let id = match m.kind {
        TagKind::Time => None,
        _ => Some(m.entity as u32 + 1),
    };
    Some((m.kind, id))
}

pub fn generate(seed: u64) -> Synthetic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder {
        text: String::new(),
        len: 0,
    };
    let mut sentences = Vec::new();
    let mut mentions = Vec::new();
    let mut words = 0;
    for n in 0..SENTENCES {
        if n > 0 {
            b.push(if n % 7 == 0 { "\n" } else { " " });
        }
        let (start, verb_end) = b.push(VERBS.choose(&mut rng).unwrap());
        words += 1;
        let slots = rng.random_range(4..8);
        for _ in 0..slots {
            b.push(" ");
            b.push(FILLER.choose(&mut rng).unwrap());
            words += 1;
            if rng.random_bool(0.45) {
                let (kind, pool) = match rng.random_range(0..10) {
                    0..=4 => (TagKind::Character, CHARACTERS),
                    5..=7 => (TagKind::Place, PLACES),
                    _ => (TagKind::Time, TIMES),
                };
                let entity = rng.random_range(0..pool.len());
                b.push(" ");
                let (s, e) = b.push(pool[entity]);
                words += pool[entity].split_whitespace().count();
                mentions.push(Mention {
                    kind,
                    entity,
                    start: s,
                    end: e,
                });
            }
        }
        b.push(" ");
        b.push(FILLER.choose(&mut rng).unwrap());
        words += 1;
        let (_, end) = b.push(".");
        sentences.push(Sentence { start, end, verb_end });
    }
    let text = b.text;

    let mut gold: Vec<usize> = rand::seq::index::sample(&mut rng, SENTENCES - 1, WORLDS - 1)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    gold.push(0);
    gold.sort_unstable();

    let all = |_: usize| true;
    let plain = |_: usize, m: &Mention| default_mention(m);
    let mut docs = Vec::new();

    docs.push(annotate("1", &text, &sentences, &mentions, Variant {
        world_starts: gold.clone(),
        keep_switch: &all,
        mention: &plain,
    }));

    // Merges worlds 4 and 5, misses every fourth mention of the first character.
    let mut merged = gold.clone();
    merged.remove(4);
    let misses = std::cell::Cell::new(0usize);
    docs.push(annotate("2", &text, &sentences, &mentions, Variant {
        world_starts: merged,
        keep_switch: &all,
        mention: &|_, m| {
            if m.kind == TagKind::Character && m.entity == 0 {
                misses.set(misses.get() + 1);
                if misses.get().is_multiple_of(4) {
                    return None;
                }
            }
            default_mention(m)
        },
    }));

    // Shifts four boundaries one sentence later and numbers characters in reverse.
    let mut shifted = gold.clone();
    for w in 6..10 {
        if shifted[w] + 1 < shifted.get(w + 1).copied().unwrap_or(SENTENCES) {
            shifted[w] += 1;
        }
    }
    docs.push(annotate("3", &text, &sentences, &mentions, Variant {
        world_starts: shifted,
        keep_switch: &all,
        mention: &|_, m| match m.kind {
            TagKind::Character => Some((m.kind, Some((CHARACTERS.len() - m.entity) as u32))),
            _ => default_mention(m),
        },
    }));

    // Splits the longest world and treats the second place as a character.
    let mut split = gold.clone();
    let longest = (0..WORLDS)
        .max_by_key(|&w| (split.get(w + 1).copied().unwrap_or(SENTENCES) - split[w], std::cmp::Reverse(w)))
        .unwrap();
    let end = split.get(longest + 1).copied().unwrap_or(SENTENCES);
    split.insert(longest + 1, (split[longest] + end).div_ceil(2));
    docs.push(annotate("4", &text, &sentences, &mentions, Variant {
        world_starts: split,
        keep_switch: &all,
        mention: &|_, m| match (m.kind, m.entity) {
            (TagKind::Place, 1) => Some((TagKind::Character, Some(9))),
            _ => default_mention(m),
        },
    }));

    // Drops every third switch and all time expressions.
    docs.push(annotate("5", &text, &sentences, &mentions, Variant {
        world_starts: gold.clone(),
        keep_switch: &|w| w % 3 != 0,
        mention: &|_, m| match m.kind {
            TagKind::Time => None,
            _ => default_mention(m),
        },
    }));

    // One world per sentence and only half the place mentions.
    docs.push(annotate("6", &text, &sentences, &mentions, Variant {
        world_starts: (0..SENTENCES).collect(),
        keep_switch: &all,
        mention: &|i, m| match m.kind {
            TagKind::Place if i % 2 == 1 => None,
            _ => default_mention(m),
        },
    }));

    let pos = tokenize(&text)
        .iter()
        .map(|t| {
            let tag = if t.surface.chars().all(is_punctuation) {
                "PUNCT"
            } else if VERBS.contains(&t.surface.as_str()) {
                "VERB"
            } else if t.surface.starts_with(char::is_uppercase) {
                "PROPN"
            } else {
                "NOUN"
            };
            format!("{}\t{}\t{}\n", t.index, t.surface, tag)
        })
        .collect();

    Synthetic {
        text,
        words,
        docs,
        pos,
    }
}

/// Writes annotation files, the POS sidecar and a manifest; returns the
/// manifest path.
pub fn write_corpus(dir: &Path, syn: &Synthetic) -> PathBuf {
    let mut manifest = String::from("pos_sidecar = \"pos.tsv\"\n\n");
    for doc in &syn.docs {
        let name = format!("annotator{}.txt", doc.annotator_id());
        fs::write(dir.join(&name), serialize(doc)).unwrap();
        manifest.push_str(&format!("[[annotators]]\nid = \"{}\"\npath = \"{name}\"\n\n", doc.annotator_id()));
    }
    fs::write(dir.join("pos.tsv"), &syn.pos).unwrap();
    let path = dir.join("corpus.toml");
    fs::write(&path, manifest).unwrap();
    path
}

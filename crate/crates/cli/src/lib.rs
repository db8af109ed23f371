//! `twt`: manifest-driven agreement reports for text-world annotations.
//!
//! Every command reads a manifest, parses the listed annotation files and
//! writes one report to standard output (JSON by default, CSV with `--csv`).
//! Diagnostics go to standard error as JSON lines. Exit status is 0 on
//! success, 1 on input, parse or alignment failures, and 2 on usage errors.

pub mod manifest;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use twt_core::consensus::{annotator_vs_consensus, crisp_consensus, fuzzy_membership_with, DEFAULT_THRESHOLD};
use twt_core::metrics::{
    align_elements, count_summary, match_worlds_with, ordinal_divergence_series, select_median_annotations,
    switch_agreement, PosTable, SetMode,
};
use twt_core::tag_parser::validate_alignment;
use twt_core::{Corpus, Exec, TagKind};

use manifest::{load_corpus, FileDiagnostic, LoadedCorpus};
use report::*;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{} parse error(s)", diagnostics.iter().filter(|d| d.diagnostic.is_error()).count())]
    Parse {
        digest: String,
        diagnostics: Vec<FileDiagnostic>,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) | CliError::Parse { .. } => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "twt", version, about = "Agreement reports for Text World Theory annotations")]
pub struct Cli {
    /// Emit flat CSV tables instead of a JSON document.
    #[arg(long, global = true)]
    pub csv: bool,
    /// Round floating-point values to N decimals for display.
    #[arg(long, global = true, value_name = "N")]
    pub round: Option<u32>,
    /// Evaluate everything on one thread.
    #[arg(long, global = true)]
    pub serial: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ElementKind {
    Character,
    Place,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Positions,
    Forms,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse every file and check that all share one plain text.
    Validate { manifest: PathBuf },
    /// Span counts per annotator and kind, with medians.
    Stats { manifest: PathBuf },
    /// Match text-world stretches of two annotators by edit distance.
    Match {
        manifest: PathBuf,
        /// Source and target annotator ids, e.g. `1,3`.
        #[arg(long, value_delimiter = ',', num_args = 1, required = true)]
        pair: Vec<String>,
    },
    /// Cross-annotator Jaccard agreement on characters or places.
    Elements {
        manifest: PathBuf,
        #[arg(long, value_enum)]
        kind: ElementKind,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Restrict to these annotator ids, in this order.
        #[arg(long, value_delimiter = ',')]
        annotators: Option<Vec<String>>,
    },
    /// Switch sites, agreement histogram, and optional POS profile.
    Switches {
        manifest: PathBuf,
        /// POS sidecar (token_index, surface, tag; tab-separated).
        #[arg(long)]
        pos: Option<PathBuf>,
    },
    /// Fuzzy per-token membership degrees and thresholded consensus.
    Consensus {
        manifest: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Annotators whose text-world count is nearest the median.
    Select {
        manifest: PathBuf,
        #[arg(long)]
        k: usize,
    },
}

impl Command {
    fn manifest(&self) -> &Path {
        match self {
            Command::Validate { manifest }
            | Command::Stats { manifest }
            | Command::Match { manifest, .. }
            | Command::Elements { manifest, .. }
            | Command::Switches { manifest, .. }
            | Command::Consensus { manifest, .. }
            | Command::Select { manifest, .. } => manifest,
        }
    }
}

/// Parses `args` (program name first), runs the command, and returns the
/// process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, err) {
        Ok((report, code)) => {
            let text = if cli.csv { report.to_csv(cli.round) } else { report.to_json(cli.round) };
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(CliError::Parse { digest, diagnostics }) if matches!(cli.command, Command::Validate { .. }) => {
            emit_diagnostics(err, &diagnostics);
            let payload = Payload::Validation(ValidationPayload {
                documents: Vec::new(),
                diagnostics,
                alignment: None,
            });
            let report = Report::new(digest, payload);
            let text = if cli.csv { report.to_csv(cli.round) } else { report.to_json(cli.round) };
            let _ = out.write_all(text.as_bytes());
            1
        }
        Err(e) => {
            if let CliError::Parse { diagnostics, .. } = &e {
                emit_diagnostics(err, diagnostics);
            }
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit_diagnostics(err: &mut dyn Write, diagnostics: &[FileDiagnostic]) {
    for d in diagnostics {
        let _ = writeln!(err, "{}", serde_json::to_string(d).expect("diagnostics serialize"));
    }
}

fn build_corpus(loaded: &LoadedCorpus, ids: Option<&[String]>) -> Result<Corpus, CliError> {
    let docs = match ids {
        None => loaded.docs.clone(),
        Some(ids) => ids
            .iter()
            .map(|id| {
                loaded
                    .doc_index(id)
                    .map(|i| loaded.docs[i].clone())
                    .ok_or_else(|| CliError::Usage(format!("annotator {id:?} is not in the manifest")))
            })
            .collect::<Result<_, _>>()?,
    };
    if docs.len() < 2 {
        return Err(CliError::Input(format!(
            "this command compares annotators and needs at least 2, got {}",
            docs.len()
        )));
    }
    Corpus::new(docs, loaded.manifest.tokenizer).map_err(|e| CliError::Input(e.to_string()))
}

fn execute(cli: &Cli, err: &mut dyn Write) -> Result<(Report, i32), CliError> {
    let exec = if cli.serial { Exec::Serial } else { Exec::Parallel };
    let loaded = load_corpus(cli.command.manifest(), exec)?;
    emit_diagnostics(err, &loaded.warnings);
    let digest = loaded.digest.clone();
    let mut code = 0;

    let payload = match &cli.command {
        Command::Validate { .. } => {
            let documents = loaded
                .manifest
                .annotators
                .iter()
                .zip(&loaded.docs)
                .map(|(entry, doc)| DocumentSummary {
                    annotator_id: entry.id.clone(),
                    path: entry.path.display().to_string(),
                    characters: doc.char_len(),
                    spans: doc.spans().len(),
                })
                .collect();
            let alignment = validate_alignment(&loaded.docs).map_err(|e| CliError::Input(e.to_string()))?;
            if !alignment.aligned {
                code = 1;
                if let Some(d) = &alignment.first_divergence {
                    let _ = writeln!(
                        err,
                        "error: plain texts of {} and {} differ at character {}",
                        d.first, d.second, d.offset
                    );
                }
            }
            Payload::Validation(ValidationPayload {
                documents,
                diagnostics: loaded.warnings.clone(),
                alignment: Some(alignment),
            })
        }
        Command::Stats { .. } => {
            Payload::CountSummary(count_summary(&loaded.docs).map_err(|e| CliError::Input(e.to_string()))?)
        }
        Command::Match { pair, .. } => {
            let [source, target] = pair.as_slice() else {
                return Err(CliError::Usage(format!("--pair takes two annotator ids, got {}", pair.len())));
            };
            let corpus = build_corpus(&loaded, Some(pair))?;
            let matches = match_worlds_with(&corpus.docs()[0], &corpus.docs()[1], exec)
                .map_err(|e| CliError::Input(e.to_string()))?;
            Payload::WorldMatches(MatchPayload {
                source: source.clone(),
                target: target.clone(),
                divergence_series: ordinal_divergence_series(&matches),
                matches,
            })
        }
        Command::Elements {
            kind, mode, annotators, ..
        } => {
            let corpus = build_corpus(&loaded, annotators.as_deref())?;
            let kind = match kind {
                ElementKind::Character => TagKind::Character,
                ElementKind::Place => TagKind::Place,
            };
            let mode = match mode {
                Some(ModeArg::Positions) => SetMode::Positions,
                Some(ModeArg::Forms) => SetMode::Forms,
                None => loaded.manifest.element_mode,
            };
            let alignments = align_elements(&corpus, kind, mode).map_err(|e| CliError::Input(e.to_string()))?;
            Payload::ElementAlignment(ElementsPayload {
                kind,
                mode,
                annotators: corpus.annotator_ids().map(str::to_string).collect(),
                elements: alignments
                    .into_iter()
                    .map(|a| ElementRow {
                        label: a.label,
                        members: a.members.into_iter().map(|m| m.map(|m| m.element)).collect(),
                        pairwise: a.pairwise,
                        mean_j: a.mean_j,
                    })
                    .collect(),
            })
        }
        Command::Switches { pos, .. } => {
            let corpus = build_corpus(&loaded, None)?;
            let pos_path = match (pos, &loaded.manifest.pos_sidecar) {
                (Some(p), _) => Some(p.clone()),
                (None, Some(p)) => Some(loaded.resolve(p)),
                (None, None) => None,
            };
            let table = match &pos_path {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
                    Some(PosTable::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?)
                }
                None => None,
            };
            let agreement = switch_agreement(&corpus, table.as_ref()).map_err(|e| {
                let path = pos_path.as_deref().map(|p| p.display().to_string()).unwrap_or_default();
                CliError::Input(format!("{path}: {e}"))
            })?;
            Payload::SwitchAgreement(SwitchesPayload {
                num_annotators: agreement.num_annotators,
                histogram: agreement.histogram,
                sites: agreement.sites,
                pos_distribution: agreement.pos_distribution,
            })
        }
        Command::Consensus { threshold, .. } => {
            let corpus = build_corpus(&loaded, None)?;
            let threshold = threshold.or(loaded.manifest.threshold).unwrap_or(DEFAULT_THRESHOLD);
            let fuzzy = fuzzy_membership_with(&corpus, exec);
            let crisp = crisp_consensus(&fuzzy, threshold).map_err(|e| CliError::Usage(e.to_string()))?;
            let tokens = corpus
                .tokens()
                .iter()
                .filter(|t| TagKind::ALL.iter().any(|&k| fuzzy.votes(k, t.index) > 0))
                .map(|t| TokenDegrees {
                    index: t.index,
                    surface: t.surface.clone(),
                    degrees: KindValues::from_fn(|k| fuzzy.degree(k, t.index)),
                })
                .collect();
            let runs = TagKind::ALL
                .iter()
                .flat_map(|&kind| {
                    let corpus = &corpus;
                    crisp.runs(kind).iter().map(move |r| RunRow {
                        kind,
                        first: r.first,
                        last: r.last,
                        text: corpus.token_run_text(r.first, r.last).to_string(),
                    })
                })
                .collect();
            let scores = (0..corpus.len())
                .map(|d| AnnotatorScore {
                    annotator_id: corpus.docs()[d].annotator_id().to_string(),
                    jaccard: KindValues::from_fn(|k| annotator_vs_consensus(&corpus, d, &crisp, k)),
                })
                .collect();
            Payload::Consensus(ConsensusPayload {
                threshold,
                num_annotators: fuzzy.num_annotators(),
                token_count: fuzzy.token_count(),
                tokens,
                runs,
                annotator_vs_consensus: scores,
            })
        }
        Command::Select { k, .. } => {
            let selected = select_median_annotations(&loaded.docs, *k).map_err(|e| CliError::Usage(e.to_string()))?;
            let summary = count_summary(&loaded.docs).map_err(|e| CliError::Input(e.to_string()))?;
            let median = summary.medians.text_worlds;
            let midpoint = median.midpoint();
            Payload::Selection(SelectPayload {
                k: *k,
                median,
                midpoint,
                selected: selected
                    .into_iter()
                    .map(|id| {
                        let counts = summary.annotators.iter().find(|a| a.annotator_id == id).expect("selected id");
                        SelectedAnnotator {
                            distance: (counts.text_worlds as f64 - midpoint).abs(),
                            text_worlds: counts.text_worlds,
                            annotator_id: id,
                        }
                    })
                    .collect(),
            })
        }
    };
    Ok((Report::new(digest, payload), code))
}

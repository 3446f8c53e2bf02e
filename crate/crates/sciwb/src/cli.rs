//! The `sciwb` command line. Each command loads the workspace, calls one
//! operation from [`crate::ops`] and prints its result as text or JSON.

use std::fmt::Write as _;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use sciwb_core::assessment::QuizSummary;
use sciwb_core::critique::CritiqueReport;
use sciwb_core::phrasebank::{GapSpan, Tags};
use sciwb_core::revision::{ConnectiveReport, Draft, DraftChecks};
use sciwb_core::PhrasebankEntry;

use crate::ops::{self, ErrorKind, OpError, TemplateRef, TemplateView};
use crate::workspace::{self, open_workspace, Workspace};

#[derive(Debug, Parser)]
#[command(name = "sciwb", version, about = "Phrasebank, structure critique and self-assessment for scientific writing")]
pub struct Cli {
    /// Workspace directory.
    #[arg(long, global = true, env = "SCIWB_WORKSPACE", default_value = ".")]
    pub workspace: PathBuf,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the bundled seed workspace into the workspace directory.
    Init,
    /// Validate a document directory (meta.json, <section>.txt,
    /// annotations.json) and add it to the corpus.
    Ingest { doc_dir: PathBuf },
    /// Turn a span of a corpus text into a phrasebank entry with gaps.
    Extract {
        #[arg(long)]
        id: String,
        #[arg(long)]
        doc: String,
        #[arg(long, default_value = "introduction")]
        section: String,
        /// Character span START:END of the expression.
        #[arg(long, value_parser = parse_span)]
        span: (usize, usize),
        /// Gap as START:END:LABEL (character offsets in the section text).
        #[arg(long = "gap", value_parser = parse_gap, required = true)]
        gaps: Vec<GapSpan>,
        /// Print the entry without saving it.
        #[arg(long)]
        dry_run: bool,
    },
    /// Tag an entry with taxonomy ids; given layers replace, messages add up.
    Classify {
        id: String,
        #[arg(long)]
        section: Option<String>,
        #[arg(long)]
        component: Option<String>,
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long = "message")]
        messages: Vec<String>,
    },
    /// Fill the gaps of an entry or template, one filler per gap in order.
    Fill {
        #[command(flatten)]
        source: Source,
        fillers: Vec<String>,
    },
    /// Join entries and templates (in the order given) into one template.
    Combine {
        #[arg(long = "entry")]
        entries: Vec<String>,
        #[arg(long = "template")]
        templates: Vec<String>,
        #[arg(long, default_value = " ")]
        separator: String,
        /// Save the result as a new phrasebank entry.
        #[arg(long)]
        save_as: Option<String>,
    },
    /// Report connective use in a text file.
    Connectives { file: PathBuf },
    /// Assemble a section from a JSON request {section, plan, passages}.
    Assemble { request: PathBuf },
    /// Check a text file for connectives, unfilled gaps and wordiness.
    Check { file: PathBuf },
    /// Critique a component sequence against guidelines and the case base.
    Critique {
        #[arg(long)]
        paper_type: String,
        #[arg(long)]
        section: Option<String>,
        #[arg(short, long)]
        k: Option<usize>,
        /// Component ids in order.
        #[arg(required = true)]
        sequence: Vec<String>,
    },
    /// Show a quiz, or grade answers from a JSON file {responses: [[p, ...], ...]}.
    Quiz {
        quiz_id: String,
        #[arg(long)]
        answers: Option<PathBuf>,
    },
    /// Serve the JSON API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
    },
}

#[derive(Debug, clap::Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    #[arg(long)]
    entry: Option<String>,
    #[arg(long)]
    template: Option<String>,
}

fn parse_span(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or("expected START:END")?;
    Ok((a.parse().map_err(|e| format!("{e}"))?, b.parse().map_err(|e| format!("{e}"))?))
}

fn parse_gap(s: &str) -> Result<GapSpan, String> {
    let mut parts = s.splitn(3, ':');
    let (Some(a), Some(b), Some(label)) = (parts.next(), parts.next(), parts.next()) else {
        return Err("expected START:END:LABEL".into());
    };
    let (start, end) = parse_span(&format!("{a}:{b}"))?;
    Ok(GapSpan::new(start, end, label))
}

/// A command result: JSON for `--json`, text otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub json: Value,
    pub text: String,
}

impl Output {
    fn new<T: Serialize>(value: &T, text: String) -> Self {
        Output { json: serde_json::to_value(value).expect("results serialize to JSON"), text }
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            let mut s = serde_json::to_string_pretty(&self.json).expect("JSON values always render");
            s.push('\n');
            s
        } else {
            self.text.clone()
        }
    }
}

fn read_text(path: &Path) -> Result<String, OpError> {
    fs::read_to_string(path).map_err(|e| {
        OpError::new(ErrorKind::Invalid, "cannot read file", e).at(path.display().to_string())
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, OpError> {
    let text = read_text(path)?;
    crate::formats::parse_json(&path.display().to_string(), text.as_bytes()).map_err(|e| {
        let loc = e.location().map(|l| format!("{}:{l}", e.file)).unwrap_or(e.file.clone());
        OpError::new(ErrorKind::Invalid, "invalid request", &e.message).at(loc)
    })
}

fn open(cli: &Cli) -> Result<Workspace, OpError> {
    Ok(open_workspace(&cli.workspace)?)
}

fn save(ws: &Workspace, entry: PhrasebankEntry) -> Result<(), OpError> {
    workspace::save_phrasebank(ws, ops::upsert(ws, entry))?;
    Ok(())
}

/// Runs every command except `serve`, which [`serve`] handles.
pub fn run(cli: &Cli) -> Result<Output, OpError> {
    match &cli.command {
        Command::Init => {
            let ws = workspace::init_workspace(&cli.workspace)?;
            let summary = WorkspaceSummary::of(&ws);
            let text = format!("initialized {}\n{}", ws.root().display(), summary.text());
            Ok(Output::new(&summary, text))
        }
        Command::Ingest { doc_dir } => {
            let before = open(cli)?;
            let ws = workspace::ingest(&before, doc_dir)?;
            let summary = WorkspaceSummary::of(&ws);
            let id = doc_dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(Output::new(&summary, format!("ingested {id}\n{}", summary.text())))
        }
        Command::Extract { id, doc, section, span, gaps, dry_run } => {
            let ws = open(cli)?;
            let req = ops::ExtractRequest {
                id: id.clone(),
                doc: doc.clone(),
                section: section.clone(),
                start: span.0,
                end: span.1,
                gaps: gaps.clone(),
            };
            let entry = ops::extract(&ws, &req)?;
            if !dry_run {
                save(&ws, entry.clone())?;
            }
            Ok(Output::new(&entry, entry_text(&entry)))
        }
        Command::Classify { id, section, component, strategy, messages } => {
            let ws = open(cli)?;
            let tags = Tags {
                section: section.clone(),
                component: component.clone(),
                strategy: strategy.clone(),
                messages: messages.iter().cloned().collect(),
            };
            let entry = ops::classify(&ws, &ops::ClassifyRequest { id: id.clone(), tags })?;
            save(&ws, entry.clone())?;
            Ok(Output::new(&entry, entry_text(&entry)))
        }
        Command::Fill { source, fillers } => {
            let ws = open(cli)?;
            let source = match (&source.entry, &source.template) {
                (Some(e), _) => TemplateRef::Entry(e.clone()),
                (None, t) => TemplateRef::Template(t.clone().unwrap_or_default()),
            };
            let res = ops::fill_template(&ws, &ops::FillRequest { source, fillers: fillers.clone() })?;
            let text = format!("{}\n", res.text);
            Ok(Output::new(&res, text))
        }
        Command::Combine { entries, templates, separator, save_as } => {
            let ws = open(cli)?;
            let parts = entries
                .iter()
                .map(|e| TemplateRef::Entry(e.clone()))
                .chain(templates.iter().map(|t| TemplateRef::Template(t.clone())))
                .collect();
            let req = ops::CombineRequest { parts, separator: separator.clone() };
            if let Some(id) = save_as {
                let entry = ops::combined_entry(&ws, &req, id)?;
                save(&ws, entry.clone())?;
                return Ok(Output::new(&entry, entry_text(&entry)));
            }
            let view = ops::combine_templates(&ws, &req)?;
            Ok(Output::new(&view, template_text(&view)))
        }
        Command::Connectives { file } => {
            let ws = open(cli)?;
            let report = ops::connectives(&ws, &ops::TextRequest { text: read_text(file)? });
            Ok(Output::new(&report, connectives_text(&report)))
        }
        Command::Assemble { request } => {
            let ws = open(cli)?;
            let draft = ops::assemble(&ws, &read_json(request)?)?;
            Ok(Output::new(&draft, draft_text(&draft)))
        }
        Command::Check { file } => {
            let ws = open(cli)?;
            let checks = ops::checks(&ws, &ops::TextRequest { text: read_text(file)? })?;
            Ok(Output::new(&checks, checks_text(&checks)))
        }
        Command::Critique { paper_type, section, k, sequence } => {
            let ws = open(cli)?;
            let req = ops::CritiqueRequest {
                section: section.clone(),
                paper_type: paper_type.clone(),
                sequence: sequence.clone(),
                k: *k,
            };
            let report = ops::critique(&ws, &req)?;
            Ok(Output::new(&report, critique_text(&report)))
        }
        Command::Quiz { quiz_id, answers } => {
            let ws = open(cli)?;
            match answers {
                Some(path) => {
                    let summary = ops::grade(&ws, quiz_id, &read_json(path)?)?;
                    Ok(Output::new(&summary, summary_text(&summary)))
                }
                None => {
                    let quiz = ws.quizzes().get(quiz_id).ok_or_else(|| OpError::not_found("quiz", quiz_id))?;
                    let mut text = format!("{}\n", quiz.title);
                    for (i, item) in quiz.items.iter().enumerate() {
                        let _ = writeln!(text, "\n{}. [{:?}] {}", i + 1, item.bloom, item.stem);
                        for (j, c) in item.choices.iter().enumerate() {
                            let _ = writeln!(text, "   {}) {c}", (b'a' + j as u8) as char);
                        }
                    }
                    Ok(Output::new(quiz, text))
                }
            }
        }
        Command::Serve { .. } => Err(OpError::new(ErrorKind::Invalid, "not a batch command", "use serve()")),
    }
}

pub fn serve(cli: &Cli, bind: SocketAddr) -> Result<(), OpError> {
    let ws = open(cli)?;
    let rt = tokio::runtime::Runtime::new()
        .map_err(|e| OpError::new(ErrorKind::Storage, "runtime failure", e))?;
    rt.block_on(crate::server::serve(ws, bind))
        .map_err(|e| OpError::new(ErrorKind::Storage, "bind failure", e).at(bind.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WorkspaceSummary {
    pub version: String,
    pub documents: usize,
    pub cases: usize,
    pub entries: usize,
    pub quizzes: usize,
}

impl WorkspaceSummary {
    pub fn of(ws: &Workspace) -> Self {
        WorkspaceSummary {
            version: ws.version(),
            documents: ws.documents().len(),
            cases: ws.cases().len(),
            entries: ws.phrasebank().len(),
            quizzes: ws.quizzes().len(),
        }
    }

    fn text(&self) -> String {
        format!(
            "{} documents, {} cases, {} phrasebank entries, {} quizzes (version {})\n",
            self.documents,
            self.cases,
            self.entries,
            self.quizzes,
            &self.version[..12]
        )
    }
}

fn entry_text(e: &PhrasebankEntry) -> String {
    let t = &e.tags;
    let mut tags: Vec<String> = [&t.section, &t.component, &t.strategy].into_iter().flatten().cloned().collect();
    tags.extend(t.messages.iter().map(|m| format!("+{m}")));
    format!("{}: {}\n  tags: {}\n", e.id, e.template, if tags.is_empty() { "-".into() } else { tags.join(" ") })
}

fn template_text(v: &TemplateView) -> String {
    format!("{}\n  {} gap(s)\n", v.template, v.gap_count)
}

fn connectives_text(r: &ConnectiveReport) -> String {
    let mut out = String::new();
    for (phrase, u) in &r.connectives {
        let _ = writeln!(out, "{phrase:<20} {:<9} {}", u.category.as_str(), u.count);
    }
    let totals: Vec<String> = r.totals.iter().map(|(c, n)| format!("{c} {n}")).collect();
    let _ = writeln!(out, "totals: {}", totals.join(", "));
    for w in &r.warnings {
        let _ = writeln!(out, "warning: `{}` used {} times around sentence {}", w.connective, w.count, w.sentence + 1);
    }
    out
}

fn checks_text(c: &DraftChecks) -> String {
    let mut out = connectives_text(&c.connectives);
    for g in &c.unfilled_gaps {
        let _ = writeln!(out, "unfilled gap `{}` at {}..{}", g.label, g.start, g.end);
    }
    for w in &c.wordiness {
        let _ = writeln!(out, "wordy `{}` at {}..{}: try `{}`", w.pattern, w.start, w.end, w.suggestion);
    }
    if c.unfilled_gaps.is_empty() && c.wordiness.is_empty() {
        out.push_str("no unfilled gaps, no wordy phrases\n");
    }
    out
}

fn draft_text(d: &Draft) -> String {
    format!("{}\n\n---\n{}", d.text, checks_text(&d.checks))
}

fn critique_text(r: &CritiqueReport) -> String {
    let mut out = String::new();
    for c in &r.critiques {
        let kind = serde_json::to_value(c.kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        let _ = writeln!(out, "[{kind}] {}", c.message);
    }
    if !r.ranked_cases.is_empty() {
        out.push_str("nearest cases:\n");
        for rc in &r.ranked_cases.0 {
            let _ = writeln!(out, "  {:.3} {}", rc.score.value(), rc.case_id);
        }
    }
    out
}

fn summary_text(s: &QuizSummary) -> String {
    let mut out = String::new();
    for r in &s.results {
        let class = serde_json::to_value(r.class).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        let _ = writeln!(out, "{:<6} {:>7.3}  {class}", r.item, r.score);
    }
    match s.mean_score {
        Some(m) => {
            let _ = writeln!(out, "mean score {m:.3} over {} items", s.items);
        }
        None => out.push_str("no items\n"),
    }
    out
}

//! Request/response operations shared by the CLI and the HTTP API. Each one
//! wraps a single library operation, so both front ends return the same JSON
//! for the same input.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use sciwb_core::assessment::{grade_quiz, ApmResponse, AssessmentError, QuizSummary};
use sciwb_core::corpus::{ComponentSequence, CorpusError, PaperType, Span};
use sciwb_core::critique::{cycle_step, generate_critiques, CritiqueError, CritiqueReport, CritiqueSession, StructureSketch};
use sciwb_core::phrasebank::{
    classify_entry, combine, extract_template, fill, parse_template, render_template, Filling, GapSpan,
    PhrasebankError, Provenance, Segment, Tags, Template, TemplateError,
};
use sciwb_core::retrieval::{Query, RetrievalError};
use sciwb_core::revision::{assemble_section, check_text, connective_report, ConnectiveReport, Draft, DraftChecks, RevisionError};
use sciwb_core::PhrasebankEntry;

use crate::formats::FileError;
use crate::workspace::{Workspace, WorkspaceError};

pub const DEFAULT_K: usize = 10;
pub const DEFAULT_NEIGHBOURS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Invalid,
    NotFound,
    Conflict,
    Storage,
}

/// Machine-readable failure: `error` is a short stable phrase, `detail` the
/// full message, `location` where in the input the problem is, if known.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpError {
    #[serde(skip, default = "invalid")]
    pub kind: ErrorKind,
    pub error: String,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
}

fn invalid() -> ErrorKind {
    ErrorKind::Invalid
}

impl OpError {
    pub fn new(kind: ErrorKind, error: &str, detail: impl fmt::Display) -> Self {
        OpError { kind, error: error.to_string(), detail: detail.to_string(), location: None }
    }

    pub fn at(mut self, location: impl Into<String>) -> Self {
        self.location = Some(location.into());
        self
    }

    pub fn not_found(what: &str, id: &str) -> Self {
        OpError::new(ErrorKind::NotFound, &format!("unknown {what}"), format!("no {what} with id `{id}`"))
    }
}

impl fmt::Display for OpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.error, self.detail)?;
        if let Some(loc) = &self.location {
            write!(f, " (at {loc})")?;
        }
        Ok(())
    }
}

impl std::error::Error for OpError {}

impl From<TemplateError> for OpError {
    fn from(e: TemplateError) -> Self {
        let err = OpError::new(ErrorKind::Invalid, "invalid template", &e);
        match e {
            TemplateError::Unterminated { offset } | TemplateError::EmptyLabel { offset } => {
                err.at(format!("offset {offset}"))
            }
            _ => err,
        }
    }
}

impl From<CorpusError> for OpError {
    fn from(e: CorpusError) -> Self {
        OpError::new(ErrorKind::Invalid, "unknown id", e)
    }
}

impl From<PhrasebankError> for OpError {
    fn from(e: PhrasebankError) -> Self {
        match e {
            PhrasebankError::Template(t) => t.into(),
            PhrasebankError::Corpus(c) => c.into(),
            PhrasebankError::FillerCountMismatch { .. } | PhrasebankError::EmptyFiller(_) => {
                OpError::new(ErrorKind::Invalid, "invalid filling", e)
            }
            other => OpError::new(ErrorKind::Invalid, "invalid extraction", other),
        }
    }
}

impl From<RetrievalError> for OpError {
    fn from(e: RetrievalError) -> Self {
        match e {
            RetrievalError::UnknownId(c) => c.into(),
            other => OpError::new(ErrorKind::Invalid, "invalid query", other),
        }
    }
}

impl From<CritiqueError> for OpError {
    fn from(e: CritiqueError) -> Self {
        match e {
            CritiqueError::EmptyCaseBase => OpError::new(ErrorKind::Conflict, "empty case base", e),
            CritiqueError::Corpus(c) => c.into(),
            other => OpError::new(ErrorKind::Invalid, "invalid sketch", other),
        }
    }
}

impl From<RevisionError> for OpError {
    fn from(e: RevisionError) -> Self {
        match e {
            RevisionError::UnterminatedGap { offset } => {
                OpError::new(ErrorKind::Invalid, "invalid text", &e).at(format!("offset {offset}"))
            }
            RevisionError::Corpus(c) => c.into(),
            other => OpError::new(ErrorKind::Invalid, "invalid draft", other),
        }
    }
}

impl From<AssessmentError> for OpError {
    fn from(e: AssessmentError) -> Self {
        OpError::new(ErrorKind::Invalid, "invalid response", e)
    }
}

impl From<WorkspaceError> for OpError {
    fn from(e: WorkspaceError) -> Self {
        match &e {
            WorkspaceError::Invalid(issues) => {
                let mut err = OpError::new(ErrorKind::Invalid, "invalid workspace", &e);
                if let [only] = issues.as_slice() {
                    err.location = Some(locate(only));
                }
                err
            }
            WorkspaceError::NotFound(_) => OpError::new(ErrorKind::NotFound, "workspace not found", e),
            WorkspaceError::DuplicateDocument(_) | WorkspaceError::AlreadyInitialized(_) => {
                OpError::new(ErrorKind::Conflict, "already exists", e)
            }
            WorkspaceError::Io { .. } => OpError::new(ErrorKind::Storage, "storage failure", e),
        }
    }
}

fn locate(e: &FileError) -> String {
    match e.location() {
        Some(loc) => format!("{}:{loc}", e.file),
        None => e.file.clone(),
    }
}

fn paper_type(s: &str) -> Result<PaperType, OpError> {
    PaperType::from_str(s).map_err(|e| OpError::new(ErrorKind::Invalid, "invalid paper type", e).at("paper_type"))
}

fn entry<'a>(ws: &'a Workspace, id: &str) -> Result<&'a PhrasebankEntry, OpError> {
    ws.entry(id).ok_or_else(|| OpError::not_found("entry", id))
}

// ------------------------------------------------------------------ phrasebank

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhrasebankQuery {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    /// Whitespace-separated keywords.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

pub fn query_phrasebank(ws: &Workspace, req: &PhrasebankQuery) -> Result<Vec<PhrasebankEntry>, OpError> {
    let query = Query {
        section: req.section.clone(),
        component: req.component.clone(),
        strategy: req.strategy.clone(),
        message: req.message.clone(),
        keywords: req.q.iter().flat_map(|q| q.split_whitespace()).map(str::to_string).collect(),
        limit: req.k.unwrap_or(DEFAULT_K),
    };
    Ok(ws.index().query(&query, ws.taxonomy())?.into_iter().cloned().collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SegmentView {
    Fixed {
        text: String,
    },
    Gap {
        label: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hint: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateView {
    /// Canonical concrete syntax.
    pub template: String,
    pub gap_count: usize,
    pub segments: Vec<SegmentView>,
}

impl From<&Template> for TemplateView {
    fn from(t: &Template) -> Self {
        TemplateView {
            template: render_template(t),
            gap_count: t.gap_count(),
            segments: t
                .segments()
                .iter()
                .map(|s| match s {
                    Segment::Fixed(text) => SegmentView::Fixed { text: text.clone() },
                    Segment::Gap(g) => SegmentView::Gap { label: g.label.clone(), hint: g.hint.clone() },
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParseRequest {
    pub template: String,
}

pub fn parse(req: &ParseRequest) -> Result<TemplateView, OpError> {
    Ok(TemplateView::from(&parse_template(&req.template)?))
}

/// Names a template either inline or by phrasebank entry id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateRef {
    Template(String),
    Entry(String),
}

fn resolve(ws: &Workspace, r: &TemplateRef) -> Result<Template, OpError> {
    match r {
        TemplateRef::Template(s) => Ok(parse_template(s)?),
        TemplateRef::Entry(id) => Ok(entry(ws, id)?.template.clone()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillRequest {
    #[serde(flatten)]
    pub source: TemplateRef,
    pub fillers: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillResponse {
    pub text: String,
}

pub fn fill_template(ws: &Workspace, req: &FillRequest) -> Result<FillResponse, OpError> {
    let t = resolve(ws, &req.source)?;
    Ok(FillResponse { text: fill(&t, &Filling(req.fillers.clone()))? })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombineRequest {
    pub parts: Vec<TemplateRef>,
    #[serde(default)]
    pub separator: String,
}

fn combined(ws: &Workspace, req: &CombineRequest) -> Result<Template, OpError> {
    let parts = req.parts.iter().map(|r| resolve(ws, r)).collect::<Result<Vec<_>, _>>()?;
    Ok(combine(&parts, &req.separator)?)
}

pub fn combine_templates(ws: &Workspace, req: &CombineRequest) -> Result<TemplateView, OpError> {
    Ok(TemplateView::from(&combined(ws, req)?))
}

/// Entry built from combined parts, provenance listing the entry ids used.
pub fn combined_entry(ws: &Workspace, req: &CombineRequest, id: &str) -> Result<PhrasebankEntry, OpError> {
    let template = combined(ws, req)?;
    let sources = req
        .parts
        .iter()
        .filter_map(|r| match r {
            TemplateRef::Entry(id) => Some(id.clone()),
            TemplateRef::Template(_) => None,
        })
        .collect();
    Ok(PhrasebankEntry::new(id, template, Tags::default(), Provenance::Combined { sources })?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractRequest {
    pub id: String,
    pub doc: String,
    pub section: String,
    pub start: usize,
    pub end: usize,
    pub gaps: Vec<GapSpan>,
}

pub fn extract(ws: &Workspace, req: &ExtractRequest) -> Result<PhrasebankEntry, OpError> {
    if ws.entry(&req.id).is_some() {
        return Err(OpError::new(ErrorKind::Conflict, "already exists", format!("entry `{}` already exists", req.id)));
    }
    let doc = ws.document(&req.doc).ok_or_else(|| OpError::not_found("document", &req.doc))?;
    Ok(extract_template(&doc.annotated, &req.section, Span::new(req.start, req.end), &req.gaps, &req.id)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyRequest {
    pub id: String,
    pub tags: Tags,
}

pub fn classify(ws: &Workspace, req: &ClassifyRequest) -> Result<PhrasebankEntry, OpError> {
    Ok(classify_entry(entry(ws, &req.id)?, &req.tags, ws.taxonomy())?)
}

/// The phrasebank with `e` added, or replacing the entry of the same id.
pub fn upsert(ws: &Workspace, e: PhrasebankEntry) -> Vec<PhrasebankEntry> {
    let mut entries: Vec<PhrasebankEntry> = ws.phrasebank().iter().filter(|x| x.id != e.id).cloned().collect();
    entries.push(e);
    entries
}

// ------------------------------------------------------------------ revision

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextRequest {
    pub text: String,
}

pub fn checks(ws: &Workspace, req: &TextRequest) -> Result<DraftChecks, OpError> {
    Ok(check_text(&req.text, ws.connectives(), ws.wordiness())?)
}

pub fn connectives(ws: &Workspace, req: &TextRequest) -> ConnectiveReport {
    connective_report(&req.text, ws.connectives())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssembleRequest {
    pub section: String,
    pub plan: Vec<String>,
    /// Component id → passage text.
    pub passages: BTreeMap<String, String>,
}

pub fn assemble(ws: &Workspace, req: &AssembleRequest) -> Result<Draft, OpError> {
    let plan = ComponentSequence(req.plan.clone());
    Ok(assemble_section(&req.section, &plan, &req.passages, ws.connectives(), ws.wordiness(), ws.taxonomy())?)
}

// ------------------------------------------------------------------ critique

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CritiqueRequest {
    /// Defaults to the section of the workspace guidelines.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<String>,
    pub paper_type: String,
    pub sequence: Vec<String>,
    /// Number of nearest cases; defaults to [`DEFAULT_NEIGHBOURS`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

fn sketch(ws: &Workspace, req: &CritiqueRequest) -> Result<StructureSketch, OpError> {
    let section = req.section.as_deref().unwrap_or(&ws.guidelines().section);
    Ok(StructureSketch::new(section, paper_type(&req.paper_type)?, ComponentSequence(req.sequence.clone())))
}

pub fn critique(ws: &Workspace, req: &CritiqueRequest) -> Result<CritiqueReport, OpError> {
    let k = req.k.unwrap_or(DEFAULT_NEIGHBOURS);
    Ok(generate_critiques(&sketch(ws, req)?, ws.guidelines(), ws.cases(), k, ws.taxonomy())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionStep {
    pub session: String,
    /// 1-based number of the cycle just completed.
    pub cycle: usize,
    pub report: CritiqueReport,
}

pub fn critique_cycle(
    ws: &Workspace,
    session: CritiqueSession,
    req: &CritiqueRequest,
) -> Result<(CritiqueSession, SessionStep), OpError> {
    let k = req.k.unwrap_or(DEFAULT_NEIGHBOURS);
    let (session, report) = cycle_step(session, sketch(ws, req)?, ws.guidelines(), ws.cases(), k, ws.taxonomy())?;
    let step = SessionStep { session: session.id().to_string(), cycle: session.cycle(), report };
    Ok((session, step))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseView {
    pub id: String,
    pub doc: String,
    pub section: String,
    pub paper_type: PaperType,
    pub sequence: ComponentSequence,
}

pub fn cases(ws: &Workspace) -> Vec<CaseView> {
    ws.cases()
        .iter()
        .map(|c| CaseView {
            id: c.id().to_string(),
            doc: c.doc().to_string(),
            section: c.section().to_string(),
            paper_type: c.paper_type(),
            sequence: c.sequence().clone(),
        })
        .collect()
}

// ------------------------------------------------------------------ assessment

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuizAnswers {
    pub responses: Vec<ApmResponse>,
}

pub fn grade(ws: &Workspace, quiz_id: &str, req: &QuizAnswers) -> Result<QuizSummary, OpError> {
    let quiz = ws.quizzes().get(quiz_id).ok_or_else(|| OpError::not_found("quiz", quiz_id))?;
    Ok(grade_quiz(&quiz.items, &req.responses, &quiz.thresholds)?)
}

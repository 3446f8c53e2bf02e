//! Critiquing of section structures.
//!
//! Two analysers look at a [`StructureSketch`]: a guideline analyser that
//! evaluates declarative rules over the component sequence, and a case
//! analyser that compares the sketch with the nearest annotated cases. Their
//! findings become typed [`Critique`]s:
//!
//! | finding                                    | critique             |
//! |--------------------------------------------|----------------------|
//! | hard guideline violated                    | `direct_criticism`   |
//! | soft guideline violated                    | `indirect_criticism` |
//! | commonly-violated guideline satisfied      | `compliment`         |
//! | best case similarity ≥ threshold           | `compliment`         |
//! | edit to reach the nearest case (capped)    | `direct_suggestion`  |
//! | component named by a violated `requires`   | `instruction`        |
//! | always, exactly once                       | `general_suggestion` |

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{Case, ComponentSequence, CorpusError, PaperType, Taxonomy};
use crate::retrieval::{edit_script, retrieve_similar_cases, EditOp, RankedCases, SimilarityScore};

pub const DEFAULT_COMPLIMENT_THRESHOLD: f64 = 0.8;
pub const DEFAULT_SUGGESTION_CAP: usize = 5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CritiqueError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("guideline `{id}`: {reason}")]
    InvalidGuideline { id: String, reason: String },
    #[error("duplicate guideline id `{0}`")]
    DuplicateGuideline(String),
    #[error("guideline `{guideline}` references `{component}`, which is not a component of section `{section}`")]
    ComponentOutsideSection { guideline: String, component: String, section: String },
    #[error("guideline set is for section `{expected}` but the sketch is for `{found}`")]
    SectionMismatch { expected: String, found: String },
    #[error("compliment threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("nearest-case count must be at least 1")]
    ZeroNeighbours,
    #[error("empty case base")]
    EmptyCaseBase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Hard,
    Soft,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuidelineKind {
    Requires(String),
    Forbids(String),
    /// `before` must not be preceded by `after`.
    Precedes { before: String, after: String },
    First(String),
    Last(String),
    MaxCount { component: String, max: usize },
}

impl GuidelineKind {
    fn tag(&self) -> KindTag {
        match self {
            GuidelineKind::Requires(_) => KindTag::Requires,
            GuidelineKind::Forbids(_) => KindTag::Forbids,
            GuidelineKind::Precedes { .. } => KindTag::Precedes,
            GuidelineKind::First(_) => KindTag::First,
            GuidelineKind::Last(_) => KindTag::Last,
            GuidelineKind::MaxCount { .. } => KindTag::MaxCount,
        }
    }

    pub fn components(&self) -> Vec<&str> {
        match self {
            GuidelineKind::Requires(c)
            | GuidelineKind::Forbids(c)
            | GuidelineKind::First(c)
            | GuidelineKind::Last(c)
            | GuidelineKind::MaxCount { component: c, .. } => Vec::from([c.as_str()]),
            GuidelineKind::Precedes { before, after } => Vec::from([before.as_str(), after.as_str()]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum KindTag {
    Requires,
    Forbids,
    Precedes,
    First,
    Last,
    MaxCount,
}

#[derive(Serialize, Deserialize)]
struct RawGuideline {
    id: String,
    kind: KindTag,
    params: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    severity: Severity,
    #[serde(default)]
    rationale: String,
    #[serde(default)]
    instruction: String,
    #[serde(default)]
    commonly_violated: bool,
}

/// A declarative rule over a component sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGuideline", into = "RawGuideline")]
pub struct Guideline {
    pub id: String,
    pub kind: GuidelineKind,
    pub severity: Severity,
    pub rationale: String,
    pub instruction: String,
    pub commonly_violated: bool,
}

impl Guideline {
    pub fn new(id: &str, kind: GuidelineKind, severity: Severity) -> Result<Self, CritiqueError> {
        let invalid = |reason: &str| CritiqueError::InvalidGuideline {
            id: id.to_string(),
            reason: reason.to_string(),
        };
        if id.is_empty() {
            return Err(invalid("empty id"));
        }
        if kind.components().iter().any(|c| c.is_empty()) {
            return Err(invalid("empty component id"));
        }
        match &kind {
            GuidelineKind::Precedes { before, after } if before == after => {
                return Err(invalid("precedes needs two distinct components"));
            }
            GuidelineKind::MaxCount { max: 0, .. } => {
                return Err(invalid("max_count bound must be at least 1"));
            }
            _ => {}
        }
        Ok(Guideline {
            id: id.to_string(),
            kind,
            severity,
            rationale: String::new(),
            instruction: String::new(),
            commonly_violated: false,
        })
    }

    pub fn with_rationale(mut self, rationale: &str) -> Self {
        self.rationale = rationale.to_string();
        self
    }

    pub fn commonly_violated(mut self, flag: bool) -> Self {
        self.commonly_violated = flag;
        self
    }
}

impl TryFrom<RawGuideline> for Guideline {
    type Error = CritiqueError;

    fn try_from(raw: RawGuideline) -> Result<Self, CritiqueError> {
        let invalid = |reason: String| CritiqueError::InvalidGuideline { id: raw.id.clone(), reason };
        let arity = match raw.kind {
            KindTag::Precedes => 2,
            _ => 1,
        };
        if raw.params.len() != arity {
            return Err(invalid(format!(
                "expected {arity} component id(s), found {}",
                raw.params.len()
            )));
        }
        if (raw.kind == KindTag::MaxCount) != raw.n.is_some() {
            return Err(invalid("`n` is required for max_count and only for it".into()));
        }
        let mut params = raw.params.into_iter();
        let mut next = || params.next().unwrap_or_default();
        let kind = match raw.kind {
            KindTag::Requires => GuidelineKind::Requires(next()),
            KindTag::Forbids => GuidelineKind::Forbids(next()),
            KindTag::Precedes => GuidelineKind::Precedes { before: next(), after: next() },
            KindTag::First => GuidelineKind::First(next()),
            KindTag::Last => GuidelineKind::Last(next()),
            KindTag::MaxCount => {
                GuidelineKind::MaxCount { component: next(), max: raw.n.unwrap_or_default() }
            }
        };
        let mut g = Guideline::new(&raw.id, kind, raw.severity)?;
        g.rationale = raw.rationale;
        g.instruction = raw.instruction;
        g.commonly_violated = raw.commonly_violated;
        Ok(g)
    }
}

impl From<Guideline> for RawGuideline {
    fn from(g: Guideline) -> Self {
        let n = match g.kind {
            GuidelineKind::MaxCount { max, .. } => Some(max),
            _ => None,
        };
        RawGuideline {
            id: g.id,
            kind: g.kind.tag(),
            params: g.kind.components().into_iter().map(ToString::to_string).collect(),
            n,
            severity: g.severity,
            rationale: g.rationale,
            instruction: g.instruction,
            commonly_violated: g.commonly_violated,
        }
    }
}

/// The guideline file: tuning header plus the rules for one section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidelineSet {
    pub section: String,
    #[serde(default = "default_threshold")]
    pub compliment_threshold: f64,
    #[serde(default = "default_cap")]
    pub suggestion_cap: usize,
    pub guidelines: Vec<Guideline>,
}

fn default_threshold() -> f64 {
    DEFAULT_COMPLIMENT_THRESHOLD
}

fn default_cap() -> usize {
    DEFAULT_SUGGESTION_CAP
}

impl GuidelineSet {
    pub fn new(section: &str, guidelines: Vec<Guideline>) -> Self {
        GuidelineSet {
            section: section.to_string(),
            compliment_threshold: DEFAULT_COMPLIMENT_THRESHOLD,
            suggestion_cap: DEFAULT_SUGGESTION_CAP,
            guidelines,
        }
    }

    pub fn validate(&self, tax: &Taxonomy) -> Result<(), CritiqueError> {
        if !(0.0..=1.0).contains(&self.compliment_threshold) {
            return Err(CritiqueError::InvalidThreshold(self.compliment_threshold));
        }
        tax.section(&self.section)
            .ok_or_else(|| CorpusError::UnknownSection(self.section.clone()))?;
        let mut seen = BTreeSet::new();
        for g in &self.guidelines {
            if !seen.insert(g.id.as_str()) {
                return Err(CritiqueError::DuplicateGuideline(g.id.clone()));
            }
        }
        check_section(&self.guidelines, &self.section, tax)
    }
}

fn check_section(gs: &[Guideline], section: &str, tax: &Taxonomy) -> Result<(), CritiqueError> {
    for g in gs {
        for c in g.kind.components() {
            if tax.check_component_in(section, c).is_err() {
                return Err(CritiqueError::ComponentOutsideSection {
                    guideline: g.id.clone(),
                    component: c.to_string(),
                    section: section.to_string(),
                });
            }
        }
    }
    Ok(())
}

/// The user's proposed structure for one section.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureSketch {
    pub section: String,
    pub paper_type: PaperType,
    pub sequence: ComponentSequence,
}

impl StructureSketch {
    pub fn new(section: &str, paper_type: PaperType, sequence: ComponentSequence) -> Self {
        StructureSketch { section: section.to_string(), paper_type, sequence }
    }

    pub fn validate(&self, tax: &Taxonomy) -> Result<(), CorpusError> {
        self.sequence.validate(tax, &self.section)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuidelineCheck {
    pub guideline_id: String,
    pub violated: bool,
    pub details: String,
}

/// Where the offence sits inside the sketch: the first index that
/// demonstrates it, or the component concerned.
fn evaluate(kind: &GuidelineKind, seq: &[String]) -> (Option<usize>, String) {
    let position = |c: &str| seq.iter().position(|x| x == c);
    match kind {
        GuidelineKind::Requires(c) => match position(c) {
            None => (Some(0), format!("`{c}` is absent")),
            Some(_) => (None, format!("`{c}` is present")),
        },
        GuidelineKind::Forbids(c) => match position(c) {
            Some(i) => (Some(i), format!("`{c}` is present at {i}")),
            None => (None, format!("`{c}` is absent")),
        },
        GuidelineKind::Precedes { before, after } => {
            let last_before = seq.iter().rposition(|x| x == before);
            match (position(after), last_before) {
                (Some(b), Some(a)) if b < a => {
                    (Some(b), format!("`{after}` at {b} comes before `{before}` at {a}"))
                }
                _ => (None, format!("no `{after}` precedes a `{before}`")),
            }
        }
        GuidelineKind::First(c) => match seq.first() {
            Some(x) if x != c => (Some(0), format!("structure opens with `{x}`, not `{c}`")),
            _ => (None, format!("opening is acceptable for `{c}`")),
        },
        GuidelineKind::Last(c) => match seq.last() {
            Some(x) if x != c => {
                (Some(seq.len() - 1), format!("structure closes with `{x}`, not `{c}`"))
            }
            _ => (None, format!("closing is acceptable for `{c}`")),
        },
        GuidelineKind::MaxCount { component, max } => {
            let count = seq.iter().filter(|x| *x == component).count();
            if count > *max {
                let at = seq.iter().enumerate().filter(|(_, x)| *x == component).nth(*max);
                (at.map(|(i, _)| i), format!("`{component}` occurs {count} times (max {max})"))
            } else {
                (None, format!("`{component}` occurs {count} times (max {max})"))
            }
        }
    }
}

pub fn check_guidelines(
    sketch: &StructureSketch,
    gs: &[Guideline],
    tax: &Taxonomy,
) -> Result<Vec<GuidelineCheck>, CritiqueError> {
    check_section(gs, &sketch.section, tax)?;
    Ok(gs
        .iter()
        .map(|g| {
            let (at, details) = evaluate(&g.kind, sketch.sequence.as_slice());
            GuidelineCheck { guideline_id: g.id.clone(), violated: at.is_some(), details }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CritiqueKind {
    Compliment,
    DirectCriticism,
    IndirectCriticism,
    DirectSuggestion,
    Instruction,
    GeneralSuggestion,
}

impl CritiqueKind {
    pub const ALL: [CritiqueKind; 6] = [
        CritiqueKind::Compliment,
        CritiqueKind::DirectCriticism,
        CritiqueKind::IndirectCriticism,
        CritiqueKind::DirectSuggestion,
        CritiqueKind::Instruction,
        CritiqueKind::GeneralSuggestion,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Index(usize),
    Component(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Evidence {
    Guideline { id: String },
    Case { id: String, score: SimilarityScore },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Critique {
    #[serde(rename = "type")]
    pub kind: CritiqueKind,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Target>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<Evidence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CritiqueReport {
    pub checks: Vec<GuidelineCheck>,
    pub critiques: Vec<Critique>,
    pub ranked_cases: RankedCases,
}

impl CritiqueReport {
    pub fn count(&self, kind: CritiqueKind) -> usize {
        self.critiques.iter().filter(|c| c.kind == kind).count()
    }

    pub fn of_kind(&self, kind: CritiqueKind) -> impl Iterator<Item = &Critique> {
        self.critiques.iter().filter(move |c| c.kind == kind)
    }
}

fn name<'a>(tax: &'a Taxonomy, id: &'a str) -> &'a str {
    tax.component(id).map_or(id, |(_, c)| c.name.as_str())
}

fn describe(kind: &GuidelineKind, tax: &Taxonomy) -> String {
    match kind {
        GuidelineKind::Requires(c) => format!("includes {}", name(tax, c)),
        GuidelineKind::Forbids(c) => format!("leaves out {}", name(tax, c)),
        GuidelineKind::Precedes { before, after } => {
            format!("places {} before {}", name(tax, before), name(tax, after))
        }
        GuidelineKind::First(c) => format!("opens with {}", name(tax, c)),
        GuidelineKind::Last(c) => format!("closes with {}", name(tax, c)),
        GuidelineKind::MaxCount { component, max } => {
            format!("uses {} at most {max} time(s)", name(tax, component))
        }
    }
}

fn criticism(kind: &GuidelineKind, seq: &[String], tax: &Taxonomy) -> String {
    match kind {
        GuidelineKind::Requires(c) => format!("The structure lacks {}.", name(tax, c)),
        GuidelineKind::Forbids(c) => format!("{} does not belong in this section.", name(tax, c)),
        GuidelineKind::Precedes { before, after } => {
            format!("{} must come before {}.", name(tax, before), name(tax, after))
        }
        GuidelineKind::First(c) => format!("The structure must open with {}.", name(tax, c)),
        GuidelineKind::Last(c) => format!("The structure must close with {}.", name(tax, c)),
        GuidelineKind::MaxCount { component, max } => {
            let count = seq.iter().filter(|x| *x == component).count();
            format!("{} appears {count} times; at most {max} expected.", name(tax, component))
        }
    }
}

fn question(kind: &GuidelineKind, seq: &[String], tax: &Taxonomy) -> String {
    match kind {
        GuidelineKind::Requires(c) => format!("Have you considered including {}?", name(tax, c)),
        GuidelineKind::Forbids(c) => format!("Is {} really needed in this section?", name(tax, c)),
        GuidelineKind::Precedes { before, after } => {
            format!("Would {} work better before {}?", name(tax, before), name(tax, after))
        }
        GuidelineKind::First(c) => format!("Could the structure open with {}?", name(tax, c)),
        GuidelineKind::Last(c) => format!("Could the structure close with {}?", name(tax, c)),
        GuidelineKind::MaxCount { component, .. } => {
            let count = seq.iter().filter(|x| *x == component).count();
            format!("Does {} need to appear {count} times?", name(tax, component))
        }
    }
}

fn with_rationale(message: String, g: &Guideline) -> String {
    if g.rationale.is_empty() {
        message
    } else {
        format!("{message} {}", g.rationale)
    }
}

fn suggestion(op: &EditOp, tax: &Taxonomy) -> (usize, String) {
    match op {
        EditOp::Insert { position, component } => {
            (*position, format!("Insert {} at position {position}.", name(tax, component)))
        }
        EditOp::Delete { position, component } => {
            (*position, format!("Remove {} at position {position}.", name(tax, component)))
        }
        EditOp::Substitute { position, from, to } => (
            *position,
            format!("Replace {} with {} at position {position}.", name(tax, from), name(tax, to)),
        ),
    }
}

/// Cases of the sketch's section, narrowed to its paper type when the base
/// has any of that type.
fn candidate_cases<'a>(sketch: &StructureSketch, cases: &'a [Case]) -> Vec<Case> {
    let same_section: Vec<&'a Case> = cases.iter().filter(|c| c.section() == sketch.section).collect();
    let same_type: Vec<&'a Case> =
        same_section.iter().copied().filter(|c| c.paper_type() == sketch.paper_type).collect();
    let chosen = if same_type.is_empty() { same_section } else { same_type };
    chosen.into_iter().cloned().collect()
}

pub fn generate_critiques(
    sketch: &StructureSketch,
    set: &GuidelineSet,
    cases: &[Case],
    k: usize,
    tax: &Taxonomy,
) -> Result<CritiqueReport, CritiqueError> {
    if k == 0 {
        return Err(CritiqueError::ZeroNeighbours);
    }
    if set.section != sketch.section {
        return Err(CritiqueError::SectionMismatch {
            expected: set.section.clone(),
            found: sketch.section.clone(),
        });
    }
    sketch.validate(tax)?;
    let pool = candidate_cases(sketch, cases);
    if pool.is_empty() {
        return Err(CritiqueError::EmptyCaseBase);
    }
    let seq = sketch.sequence.as_slice();
    let checks = check_guidelines(sketch, &set.guidelines, tax)?;
    let ranked = retrieve_similar_cases(&pool, &sketch.sequence, None, k);

    let mut direct = Vec::new();
    let mut indirect = Vec::new();
    let mut compliments = Vec::new();
    let mut instructions = Vec::new();
    let (mut hard, mut soft) = (0, 0);
    for g in &set.guidelines {
        let (at, _) = evaluate(&g.kind, seq);
        let evidence = Some(Evidence::Guideline { id: g.id.clone() });
        let Some(index) = at else {
            if g.commonly_violated {
                compliments.push(Critique {
                    kind: CritiqueKind::Compliment,
                    message: format!("Well done: the structure {}.", describe(&g.kind, tax)),
                    target: None,
                    evidence,
                });
            }
            continue;
        };
        let target = match &g.kind {
            GuidelineKind::Requires(c) | GuidelineKind::MaxCount { component: c, .. } => {
                Target::Component(c.clone())
            }
            _ => Target::Index(index),
        };
        match g.severity {
            Severity::Hard => {
                hard += 1;
                direct.push(Critique {
                    kind: CritiqueKind::DirectCriticism,
                    message: with_rationale(criticism(&g.kind, seq, tax), g),
                    target: Some(target),
                    evidence: evidence.clone(),
                });
            }
            Severity::Soft => {
                soft += 1;
                indirect.push(Critique {
                    kind: CritiqueKind::IndirectCriticism,
                    message: question(&g.kind, seq, tax),
                    target: Some(target),
                    evidence: evidence.clone(),
                });
            }
        }
        if let GuidelineKind::Requires(c) = &g.kind {
            let text = if !g.instruction.is_empty() {
                g.instruction.clone()
            } else {
                tax.component(c).map(|(_, def)| def.instruction.clone()).unwrap_or_default()
            };
            instructions.push(Critique {
                kind: CritiqueKind::Instruction,
                message: text,
                target: Some(Target::Component(c.clone())),
                evidence,
            });
        }
    }

    let mut suggestions = Vec::new();
    let mut edits = 0;
    if let Some(best) = ranked.best() {
        let case_evidence = Evidence::Case { id: best.case_id.clone(), score: best.score };
        if best.score.value() >= set.compliment_threshold {
            compliments.push(Critique {
                kind: CritiqueKind::Compliment,
                message: format!(
                    "Your structure closely follows case {} (similarity {:.2}).",
                    best.case_id,
                    best.score.value()
                ),
                target: None,
                evidence: Some(case_evidence.clone()),
            });
        }
        if let Some(nearest) = pool.iter().find(|c| c.id() == best.case_id) {
            let script = edit_script(seq, nearest.sequence().as_slice());
            edits = script.len();
            for op in script.iter().take(set.suggestion_cap) {
                let (position, message) = suggestion(op, tax);
                suggestions.push(Critique {
                    kind: CritiqueKind::DirectSuggestion,
                    message,
                    target: Some(Target::Index(position)),
                    evidence: Some(case_evidence.clone()),
                });
            }
        }
    }

    let summary = match ranked.best() {
        Some(best) => format!(
            "{hard} hard and {soft} soft guideline violation(s); nearest case {} at similarity {:.2} is {edits} edit(s) away.",
            best.case_id,
            best.score.value()
        ),
        None => format!("{hard} hard and {soft} soft guideline violation(s)."),
    };
    let mut critiques = direct;
    critiques.extend(indirect);
    critiques.extend(compliments);
    critiques.extend(suggestions);
    critiques.extend(instructions);
    critiques.push(Critique {
        kind: CritiqueKind::GeneralSuggestion,
        message: summary,
        target: None,
        evidence: None,
    });
    Ok(CritiqueReport { checks, critiques, ranked_cases: ranked })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub sketch: StructureSketch,
    pub report: CritiqueReport,
}

/// Append-only history of submit/feedback cycles for one user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CritiqueSession {
    id: String,
    history: Vec<Cycle>,
}

impl CritiqueSession {
    pub fn new(id: &str) -> Self {
        CritiqueSession { id: id.to_string(), history: Vec::new() }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn cycle(&self) -> usize {
        self.history.len()
    }

    pub fn history(&self) -> &[Cycle] {
        &self.history
    }

    pub fn last_report(&self) -> Option<&CritiqueReport> {
        self.history.last().map(|c| &c.report)
    }
}

pub fn cycle_step(
    mut session: CritiqueSession,
    revised: StructureSketch,
    set: &GuidelineSet,
    cases: &[Case],
    k: usize,
    tax: &Taxonomy,
) -> Result<(CritiqueSession, CritiqueReport), CritiqueError> {
    let report = generate_critiques(&revised, set, cases, k, tax)?;
    session.history.push(Cycle { sketch: revised, report: report.clone() });
    Ok((session, report))
}

//! Schematic-structure taxonomy, exemplar documents, stand-off annotations
//! and the cases derived from them.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::text::{char_len, char_slice};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("duplicate {level} id `{id}` at {location}")]
    DuplicateId { level: &'static str, id: String, location: String },
    #[error("empty {level} id at {location}")]
    EmptyId { level: &'static str, location: String },
    #[error("strategy `{strategy}` references unknown message `{message}` at {location}")]
    DanglingMessage { strategy: String, message: String, location: String },
    #[error("taxonomy has no sections")]
    NoSections,
    #[error("unknown section `{0}`")]
    UnknownSection(String),
    #[error("unknown component `{0}`")]
    UnknownComponent(String),
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error("unknown message `{0}`")]
    UnknownMessage(String),
    #[error("component `{component}` does not belong to section `{section}`")]
    ComponentOutsideSection { component: String, section: String },
    #[error("strategy `{strategy}` does not belong to component `{component}`")]
    StrategyOutsideComponent { strategy: String, component: String },
    #[error("message `{message}` does not belong to {owner}")]
    MessageOutsideStrategy { message: String, owner: String },
    #[error("document id is empty")]
    EmptyDocumentId,
    #[error("document `{doc}` has no section `{section}`")]
    MissingSection { doc: String, section: String },
    #[error("span {start}..{end} is out of range for section `{section}` of length {len}")]
    SpanOutOfRange { section: String, start: usize, end: usize, len: usize },
    #[error("annotations {first:?} and {second:?} overlap in section `{section}`")]
    Overlap { section: String, first: (usize, usize), second: (usize, usize) },
    #[error("section `{0}` has no annotations; a case needs at least one component")]
    EmptyCase(String),
    #[error("invalid paper type `{0}` (expected empirical, experience, system, theory or methodology)")]
    InvalidPaperType(String),
}

pub type Result<T, E = CorpusError> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageDef {
    pub id: String,
    pub verb: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyDef {
    pub id: String,
    pub name: String,
    pub messages: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentDef {
    pub id: String,
    pub name: String,
    /// How-to prose shown when the component is missing from a structure.
    pub instruction: String,
    pub strategies: Vec<StrategyDef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionDef {
    pub id: String,
    pub name: String,
    pub components: Vec<ComponentDef>,
}

#[derive(Deserialize)]
struct RawTaxonomy {
    sections: Vec<SectionDef>,
    messages: Vec<MessageDef>,
}

/// Section → component → strategy → message hierarchy.
///
/// Component and strategy ids are unique across the whole taxonomy, so each
/// one belongs to exactly one parent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTaxonomy")]
pub struct Taxonomy {
    sections: Vec<SectionDef>,
    messages: Vec<MessageDef>,
}

impl TryFrom<RawTaxonomy> for Taxonomy {
    type Error = CorpusError;

    fn try_from(raw: RawTaxonomy) -> Result<Self> {
        Taxonomy::new(raw.sections, raw.messages)
    }
}

fn claim<'a>(
    seen: &mut BTreeSet<&'a str>,
    level: &'static str,
    id: &'a str,
    location: impl FnOnce() -> String,
) -> Result<()> {
    if id.is_empty() {
        return Err(CorpusError::EmptyId { level, location: location() });
    }
    if !seen.insert(id) {
        return Err(CorpusError::DuplicateId { level, id: id.to_string(), location: location() });
    }
    Ok(())
}

impl Taxonomy {
    pub fn new(sections: Vec<SectionDef>, messages: Vec<MessageDef>) -> Result<Self> {
        if sections.is_empty() {
            return Err(CorpusError::NoSections);
        }
        let mut message_ids = BTreeSet::new();
        for (m, msg) in messages.iter().enumerate() {
            claim(&mut message_ids, "message", &msg.id, || format!("messages[{m}]"))?;
        }
        let mut section_ids = BTreeSet::new();
        let mut component_ids = BTreeSet::new();
        let mut strategy_ids = BTreeSet::new();
        for (s, section) in sections.iter().enumerate() {
            claim(&mut section_ids, "section", &section.id, || format!("sections[{s}]"))?;
            for (c, component) in section.components.iter().enumerate() {
                claim(&mut component_ids, "component", &component.id, || {
                    format!("sections[{s}].components[{c}]")
                })?;
                for (g, strategy) in component.strategies.iter().enumerate() {
                    let at = || format!("sections[{s}].components[{c}].strategies[{g}]");
                    claim(&mut strategy_ids, "strategy", &strategy.id, at)?;
                    if let Some(missing) =
                        strategy.messages.iter().find(|m| !message_ids.contains(m.as_str()))
                    {
                        return Err(CorpusError::DanglingMessage {
                            strategy: strategy.id.clone(),
                            message: missing.clone(),
                            location: at(),
                        });
                    }
                }
            }
        }
        Ok(Taxonomy { sections, messages })
    }

    pub fn sections(&self) -> &[SectionDef] {
        &self.sections
    }

    pub fn messages(&self) -> &[MessageDef] {
        &self.messages
    }

    pub fn section(&self, id: &str) -> Option<&SectionDef> {
        self.sections.iter().find(|s| s.id == id)
    }

    /// The component and the section that owns it.
    pub fn component(&self, id: &str) -> Option<(&SectionDef, &ComponentDef)> {
        self.sections
            .iter()
            .find_map(|s| s.components.iter().find(|c| c.id == id).map(|c| (s, c)))
    }

    /// The strategy and the component that owns it.
    pub fn strategy(&self, id: &str) -> Option<(&ComponentDef, &StrategyDef)> {
        self.sections.iter().flat_map(|s| &s.components).find_map(|c| {
            c.strategies.iter().find(|g| g.id == id).map(|g| (c, g))
        })
    }

    pub fn message(&self, id: &str) -> Option<&MessageDef> {
        self.messages.iter().find(|m| m.id == id)
    }

    pub fn strategy_count(&self) -> usize {
        self.sections
            .iter()
            .flat_map(|s| &s.components)
            .map(|c| c.strategies.len())
            .sum()
    }

    /// Fails unless `component` is one of `section`'s components.
    pub fn check_component_in(&self, section: &str, component: &str) -> Result<()> {
        self.section(section).ok_or_else(|| CorpusError::UnknownSection(section.to_string()))?;
        match self.component(component) {
            None => Err(CorpusError::UnknownComponent(component.to_string())),
            Some((owner, _)) if owner.id != section => Err(CorpusError::ComponentOutsideSection {
                component: component.to_string(),
                section: section.to_string(),
            }),
            Some(_) => Ok(()),
        }
    }

    fn check_layers(
        &self,
        component: &str,
        strategy: Option<&str>,
        message: Option<&str>,
    ) -> Result<()> {
        let (_, comp) = self
            .component(component)
            .ok_or_else(|| CorpusError::UnknownComponent(component.to_string()))?;
        let strat = match strategy {
            None => None,
            Some(id) => {
                let (owner, strat) = self
                    .strategy(id)
                    .ok_or_else(|| CorpusError::UnknownStrategy(id.to_string()))?;
                if owner.id != comp.id {
                    return Err(CorpusError::StrategyOutsideComponent {
                        strategy: id.to_string(),
                        component: component.to_string(),
                    });
                }
                Some(strat)
            }
        };
        if let Some(message) = message {
            self.message(message)
                .ok_or_else(|| CorpusError::UnknownMessage(message.to_string()))?;
            let belongs = match strat {
                Some(s) => s.messages.iter().any(|m| m == message),
                None => comp.strategies.iter().flat_map(|s| &s.messages).any(|m| m == message),
            };
            if !belongs {
                let owner = match strat {
                    Some(s) => format!("strategy `{}`", s.id),
                    None => format!("any strategy of component `{component}`"),
                };
                return Err(CorpusError::MessageOutsideStrategy {
                    message: message.to_string(),
                    owner,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceMeta {
    pub origin: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    #[serde(default)]
    pub reliability: String,
}

/// An exemplar text split into sections.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    pub source: SourceMeta,
    /// Section id → plain text.
    pub sections: BTreeMap<String, String>,
}

impl Document {
    pub fn validate(&self, tax: &Taxonomy) -> Result<()> {
        if self.id.is_empty() {
            return Err(CorpusError::EmptyDocumentId);
        }
        match self.sections.keys().find(|s| tax.section(s).is_none()) {
            Some(s) => Err(CorpusError::UnknownSection(s.clone())),
            None => Ok(()),
        }
    }

    pub fn section_text(&self, section: &str) -> Result<&str> {
        self.sections.get(section).map(String::as_str).ok_or_else(|| {
            CorpusError::MissingSection { doc: self.id.clone(), section: section.to_string() }
        })
    }
}

/// End-exclusive range of char offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub section: String,
    pub start: usize,
    pub end: usize,
    pub component: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl Annotation {
    pub fn new(section: &str, start: usize, end: usize, component: &str) -> Self {
        Annotation {
            section: section.to_string(),
            start,
            end,
            component: component.to_string(),
            strategy: None,
            message: None,
        }
    }

    pub fn span(&self) -> Span {
        Span::new(self.start, self.end)
    }
}

/// A document with validated, flat, sorted annotations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnnotatedDocument {
    document: Document,
    annotations: Vec<Annotation>,
}

impl AnnotatedDocument {
    pub fn document(&self) -> &Document {
        &self.document
    }

    /// Sorted by (section, start).
    pub fn annotations(&self) -> &[Annotation] {
        &self.annotations
    }

    pub fn section_annotations<'a>(
        &'a self,
        section: &'a str,
    ) -> impl Iterator<Item = &'a Annotation> + 'a {
        self.annotations.iter().filter(move |a| a.section == section)
    }

    pub fn into_parts(self) -> (Document, Vec<Annotation>) {
        (self.document, self.annotations)
    }
}

pub fn attach_annotations(
    doc: Document,
    mut anns: Vec<Annotation>,
    tax: &Taxonomy,
) -> Result<AnnotatedDocument> {
    doc.validate(tax)?;
    for ann in &anns {
        let text = doc.section_text(&ann.section)?;
        let len = char_len(text);
        if ann.start >= ann.end || ann.end > len {
            return Err(CorpusError::SpanOutOfRange {
                section: ann.section.clone(),
                start: ann.start,
                end: ann.end,
                len,
            });
        }
        tax.check_component_in(&ann.section, &ann.component)?;
        tax.check_layers(&ann.component, ann.strategy.as_deref(), ann.message.as_deref())?;
    }
    anns.sort_by(|a, b| (&a.section, a.start, a.end).cmp(&(&b.section, b.start, b.end)));
    for pair in anns.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.section == b.section && a.span().overlaps(&b.span()) {
            return Err(CorpusError::Overlap {
                section: a.section.clone(),
                first: (a.start, a.end),
                second: (b.start, b.end),
            });
        }
    }
    Ok(AnnotatedDocument { document: doc, annotations: anns })
}

/// Ordered component ids of a section's structure.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComponentSequence(pub Vec<String>);

impl ComponentSequence {
    pub fn new<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ComponentSequence(ids.into_iter().map(Into::into).collect())
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Every id must be a component of `section`.
    pub fn validate(&self, tax: &Taxonomy, section: &str) -> Result<()> {
        self.0.iter().try_for_each(|c| tax.check_component_in(section, c))
    }
}

impl fmt::Display for ComponentSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0.join(", "))
    }
}

pub fn component_sequence(adoc: &AnnotatedDocument, section: &str) -> Result<ComponentSequence> {
    adoc.document.section_text(section)?;
    Ok(ComponentSequence(adoc.section_annotations(section).map(|a| a.component.clone()).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PaperType {
    Empirical,
    Experience,
    System,
    Theory,
    Methodology,
}

impl PaperType {
    pub const ALL: [PaperType; 5] = [
        PaperType::Empirical,
        PaperType::Experience,
        PaperType::System,
        PaperType::Theory,
        PaperType::Methodology,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PaperType::Empirical => "empirical",
            PaperType::Experience => "experience",
            PaperType::System => "system",
            PaperType::Theory => "theory",
            PaperType::Methodology => "methodology",
        }
    }
}

impl FromStr for PaperType {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self> {
        PaperType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| CorpusError::InvalidPaperType(s.to_string()))
    }
}

impl fmt::Display for PaperType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One annotated section of an exemplar, tagged with its paper type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Case {
    id: String,
    doc: String,
    section: String,
    paper_type: PaperType,
    text: String,
    annotations: Vec<Annotation>,
    sequence: ComponentSequence,
}

impl Case {
    /// `<doc-id>/<section-id>`.
    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn doc(&self) -> &str {
        &self.doc
    }

    pub fn section(&self) -> &str {
        &self.section
    }

    pub fn paper_type(&self) -> PaperType {
        self.paper_type
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn annotations(&self) -> &[Annotation] {
        &self.annotations
    }

    pub fn sequence(&self) -> &ComponentSequence {
        &self.sequence
    }

    /// The annotated text of the component at `index` in the sequence.
    pub fn passage(&self, index: usize) -> Option<&str> {
        let a = self.annotations.get(index)?;
        char_slice(&self.text, a.start, a.end)
    }
}

pub fn make_case(adoc: &AnnotatedDocument, section: &str, paper_type: PaperType) -> Result<Case> {
    let sequence = component_sequence(adoc, section)?;
    if sequence.is_empty() {
        return Err(CorpusError::EmptyCase(section.to_string()));
    }
    let doc = &adoc.document;
    Ok(Case {
        id: format!("{}/{}", doc.id, section),
        doc: doc.id.clone(),
        section: section.to_string(),
        paper_type,
        text: doc.section_text(section)?.to_string(),
        annotations: adoc.section_annotations(section).cloned().collect(),
        sequence,
    })
}

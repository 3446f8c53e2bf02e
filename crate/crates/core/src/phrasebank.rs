//! Gap-marked templates and the phrasebank entries built from them.
//!
//! Concrete syntax: `[[label]]` or `[[label|hint]]` is a gap, `\[[` is a
//! literal `[[`, everything else is fixed text. Labels are tokens made of
//! alphanumerics, `-`, `_` and `.`.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::{AnnotatedDocument, CorpusError, Span, Taxonomy};
use crate::text::{self, char_len, char_slice, escape_literal, Token};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("template is empty")]
    Empty,
    #[error("unterminated `[[` at offset {offset}")]
    Unterminated { offset: usize },
    #[error("gap with empty label at offset {offset}")]
    EmptyLabel { offset: usize },
    #[error("invalid gap label `{0}` (use letters, digits, `-`, `_` or `.`)")]
    InvalidLabel(String),
    #[error("invalid gap hint `{0}` (must be non-empty, without `]]`, not ending in `]`)")]
    InvalidHint(String),
    #[error("template has no gap; whole sentences are not reusable")]
    NoGap,
    #[error("template has no fixed text")]
    NoFixedText,
    #[error("fixed segment {0} is empty")]
    EmptyFixed(usize),
    #[error("fixed segment {0} is followed by another fixed segment")]
    AdjacentFixed(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PhrasebankError {
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("entry id is empty")]
    EmptyEntryId,
    #[error("span {start}..{end} is out of range for a section of length {len}")]
    SpanOutOfRange { start: usize, end: usize, len: usize },
    #[error("gap span {start}..{end} lies outside the extracted span")]
    GapOutsideSpan { start: usize, end: usize },
    #[error("gap span {start}..{end} is empty")]
    EmptyGapSpan { start: usize, end: usize },
    #[error("gap spans {first:?} and {second:?} overlap")]
    OverlappingGaps { first: (usize, usize), second: (usize, usize) },
    #[error("template has {expected} gaps but {got} fillers were given")]
    FillerCountMismatch { expected: usize, got: usize },
    #[error("filler {0} is empty")]
    EmptyFiller(usize),
    #[error("nothing to combine")]
    EmptyCombine,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gap {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hint: Option<String>,
}

impl Gap {
    pub fn new(label: &str, hint: Option<&str>) -> Self {
        Gap { label: label.to_string(), hint: hint.map(ToString::to_string) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Segment {
    Fixed(String),
    Gap(Gap),
}

pub fn is_valid_label(label: &str) -> bool {
    !label.is_empty()
        && label.chars().all(|c| c.is_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

pub fn is_valid_hint(hint: &str) -> bool {
    !hint.is_empty() && !hint.contains("]]") && !hint.ends_with(']')
}

/// A reusable expression: fixed text interleaved with gaps.
///
/// Always canonical: no empty or adjacent fixed segments, at least one gap
/// and at least one fixed segment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Template {
    segments: Vec<Segment>,
}

impl Template {
    pub fn new(segments: Vec<Segment>) -> Result<Self, TemplateError> {
        if segments.is_empty() {
            return Err(TemplateError::Empty);
        }
        let mut gaps = 0;
        let mut fixed = 0;
        for (i, seg) in segments.iter().enumerate() {
            match seg {
                Segment::Fixed(text) => {
                    if text.is_empty() {
                        return Err(TemplateError::EmptyFixed(i));
                    }
                    if i > 0 && matches!(segments[i - 1], Segment::Fixed(_)) {
                        return Err(TemplateError::AdjacentFixed(i - 1));
                    }
                    fixed += 1;
                }
                Segment::Gap(gap) => {
                    if !is_valid_label(&gap.label) {
                        return Err(TemplateError::InvalidLabel(gap.label.clone()));
                    }
                    if let Some(hint) = gap.hint.as_deref().filter(|h| !is_valid_hint(h)) {
                        return Err(TemplateError::InvalidHint(hint.to_string()));
                    }
                    gaps += 1;
                }
            }
        }
        if gaps == 0 {
            return Err(TemplateError::NoGap);
        }
        if fixed == 0 {
            return Err(TemplateError::NoFixedText);
        }
        Ok(Template { segments })
    }

    /// Merges adjacent fixed text and drops empty pieces before validating.
    pub fn canonical(segments: impl IntoIterator<Item = Segment>) -> Result<Self, TemplateError> {
        let mut out: Vec<Segment> = Vec::new();
        for seg in segments {
            match (seg, out.last_mut()) {
                (Segment::Fixed(t), _) if t.is_empty() => {}
                (Segment::Fixed(t), Some(Segment::Fixed(prev))) => prev.push_str(&t),
                (seg, _) => out.push(seg),
            }
        }
        Template::new(out)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn gaps(&self) -> impl Iterator<Item = &Gap> {
        self.segments.iter().filter_map(|s| match s {
            Segment::Gap(g) => Some(g),
            Segment::Fixed(_) => None,
        })
    }

    pub fn gap_count(&self) -> usize {
        self.gaps().count()
    }

    pub fn fixed_texts(&self) -> impl Iterator<Item = &str> {
        self.segments.iter().filter_map(|s| match s {
            Segment::Fixed(t) => Some(t.as_str()),
            Segment::Gap(_) => None,
        })
    }

    /// Lower-cased words of the fixed text, for keyword search.
    pub fn fixed_words(&self) -> BTreeSet<String> {
        self.fixed_texts().flat_map(text::words).collect()
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_template(self))
    }
}

impl Serialize for Template {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&render_template(self))
    }
}

impl<'de> Deserialize<'de> for Template {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_template(&s).map_err(serde::de::Error::custom)
    }
}

pub fn parse_template(s: &str) -> Result<Template, TemplateError> {
    if s.is_empty() {
        return Err(TemplateError::Empty);
    }
    let tokens = text::scan(s).map_err(|e| TemplateError::Unterminated { offset: e.offset })?;
    let mut segments = Vec::with_capacity(tokens.len());
    for token in tokens {
        match token {
            Token::Text(t) => segments.push(Segment::Fixed(t)),
            Token::Marker { start, body, .. } => {
                let (label, hint) = match body.split_once('|') {
                    Some((label, hint)) => (label, (!hint.is_empty()).then_some(hint)),
                    None => (body.as_str(), None),
                };
                if label.is_empty() {
                    return Err(TemplateError::EmptyLabel { offset: start });
                }
                segments.push(Segment::Gap(Gap::new(label, hint)));
            }
        }
    }
    Template::new(segments)
}

pub fn render_template(t: &Template) -> String {
    let mut out = String::new();
    for (i, seg) in t.segments.iter().enumerate() {
        match seg {
            Segment::Fixed(text) => {
                let before_gap = matches!(t.segments.get(i + 1), Some(Segment::Gap(_)));
                out.push_str(&escape_literal(text, before_gap));
            }
            Segment::Gap(gap) => {
                out.push_str("[[");
                out.push_str(&gap.label);
                if let Some(hint) = &gap.hint {
                    out.push('|');
                    out.push_str(hint);
                }
                out.push_str("]]");
            }
        }
    }
    out
}

/// Classification keys of an entry.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tags {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub messages: BTreeSet<String>,
}

impl Tags {
    pub fn is_empty(&self) -> bool {
        self.section.is_none()
            && self.component.is_none()
            && self.strategy.is_none()
            && self.messages.is_empty()
    }

    pub fn validate(&self, tax: &Taxonomy) -> Result<(), CorpusError> {
        if let Some(s) = self.section.as_deref().filter(|s| tax.section(s).is_none()) {
            return Err(CorpusError::UnknownSection(s.to_string()));
        }
        if let Some(c) = self.component.as_deref().filter(|c| tax.component(c).is_none()) {
            return Err(CorpusError::UnknownComponent(c.to_string()));
        }
        if let Some(g) = self.strategy.as_deref().filter(|g| tax.strategy(g).is_none()) {
            return Err(CorpusError::UnknownStrategy(g.to_string()));
        }
        match self.messages.iter().find(|m| tax.message(m).is_none()) {
            Some(m) => Err(CorpusError::UnknownMessage(m.clone())),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    Extracted { doc: String, section: String, start: usize, end: usize },
    UserAuthored,
    /// Built by combining other entries, listed by id in order.
    Combined { sources: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhrasebankEntry {
    pub id: String,
    pub template: Template,
    #[serde(default)]
    pub tags: Tags,
    pub provenance: Provenance,
}

impl PhrasebankEntry {
    pub fn new(
        id: &str,
        template: Template,
        tags: Tags,
        provenance: Provenance,
    ) -> Result<Self, PhrasebankError> {
        if id.is_empty() {
            return Err(PhrasebankError::EmptyEntryId);
        }
        Ok(PhrasebankEntry { id: id.to_string(), template, tags, provenance })
    }
}

/// A sub-span of an extracted expression that becomes a gap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapSpan {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

impl GapSpan {
    pub fn new(start: usize, end: usize, label: &str) -> Self {
        GapSpan { start, end, label: label.to_string() }
    }
}

/// Turns a marked span of an annotated section into an entry. The entry is
/// tagged from the annotation that contains the span, if any.
pub fn extract_template(
    adoc: &AnnotatedDocument,
    section: &str,
    span: Span,
    gap_spans: &[GapSpan],
    id: &str,
) -> Result<PhrasebankEntry, PhrasebankError> {
    let doc = adoc.document();
    let text = doc.section_text(section)?;
    let len = char_len(text);
    if span.start >= span.end || span.end > len {
        return Err(PhrasebankError::SpanOutOfRange { start: span.start, end: span.end, len });
    }
    let mut gaps: Vec<&GapSpan> = gap_spans.iter().collect();
    gaps.sort_by_key(|g| (g.start, g.end));
    for g in &gaps {
        if g.start >= g.end {
            return Err(PhrasebankError::EmptyGapSpan { start: g.start, end: g.end });
        }
        if !span.contains(&Span::new(g.start, g.end)) {
            return Err(PhrasebankError::GapOutsideSpan { start: g.start, end: g.end });
        }
    }
    for pair in gaps.windows(2) {
        if pair[1].start < pair[0].end {
            return Err(PhrasebankError::OverlappingGaps {
                first: (pair[0].start, pair[0].end),
                second: (pair[1].start, pair[1].end),
            });
        }
    }

    let slice = |a: usize, b: usize| char_slice(text, a, b).unwrap_or_default().to_string();
    let mut segments = Vec::with_capacity(gaps.len() * 2 + 1);
    let mut cursor = span.start;
    for g in &gaps {
        segments.push(Segment::Fixed(slice(cursor, g.start)));
        let original = slice(g.start, g.end);
        let hint = is_valid_hint(&original).then_some(original);
        segments.push(Segment::Gap(Gap { label: g.label.clone(), hint }));
        cursor = g.end;
    }
    segments.push(Segment::Fixed(slice(cursor, span.end)));
    let template = Template::canonical(segments)?;

    let mut tags = Tags { section: Some(section.to_string()), ..Tags::default() };
    if let Some(ann) = adoc.section_annotations(section).find(|a| a.span().contains(&span)) {
        tags.component = Some(ann.component.clone());
        tags.strategy = ann.strategy.clone();
        tags.messages.extend(ann.message.clone());
    }
    let provenance = Provenance::Extracted {
        doc: doc.id.clone(),
        section: section.to_string(),
        start: span.start,
        end: span.end,
    };
    PhrasebankEntry::new(id, template, tags, provenance)
}

/// Applies `tags` to an entry: present layers replace, messages accumulate.
pub fn classify_entry(
    entry: &PhrasebankEntry,
    tags: &Tags,
    tax: &Taxonomy,
) -> Result<PhrasebankEntry, PhrasebankError> {
    tags.validate(tax)?;
    let mut out = entry.clone();
    if tags.section.is_some() {
        out.tags.section.clone_from(&tags.section);
    }
    if tags.component.is_some() {
        out.tags.component.clone_from(&tags.component);
    }
    if tags.strategy.is_some() {
        out.tags.strategy.clone_from(&tags.strategy);
    }
    out.tags.messages.extend(tags.messages.iter().cloned());
    Ok(out)
}

/// Positional gap fillers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Filling(pub Vec<String>);

impl Filling {
    pub fn new<I, S>(fillers: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Filling(fillers.into_iter().map(Into::into).collect())
    }
}

/// Substitutes each gap with its filler. Any `[[` that ends up in the output
/// is escaped, so the result never contains a gap marker.
pub fn fill(t: &Template, f: &Filling) -> Result<String, PhrasebankError> {
    let expected = t.gap_count();
    if f.0.len() != expected {
        return Err(PhrasebankError::FillerCountMismatch { expected, got: f.0.len() });
    }
    if let Some(i) = f.0.iter().position(String::is_empty) {
        return Err(PhrasebankError::EmptyFiller(i));
    }
    let mut fillers = f.0.iter();
    let mut raw = String::new();
    for seg in &t.segments {
        match seg {
            Segment::Fixed(text) => raw.push_str(text),
            Segment::Gap(_) => raw.push_str(fillers.next().map(String::as_str).unwrap_or_default()),
        }
    }
    Ok(escape_literal(&raw, false))
}

/// Concatenates templates with `separator` as fixed text between them.
pub fn combine<'a, I>(templates: I, separator: &str) -> Result<Template, PhrasebankError>
where
    I: IntoIterator<Item = &'a Template>,
{
    let mut segments = Vec::new();
    let mut any = false;
    for t in templates {
        if any {
            segments.push(Segment::Fixed(separator.to_string()));
        }
        segments.extend(t.segments.iter().cloned());
        any = true;
    }
    if !any {
        return Err(PhrasebankError::EmptyCombine);
    }
    Ok(Template::canonical(segments)?)
}

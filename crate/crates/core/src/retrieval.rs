//! Phrasebank lookup plus order-aware similarity between component
//! sequences and case retrieval built on it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::corpus::{Case, ComponentSequence, CorpusError, PaperType, Taxonomy};
use crate::phrasebank::PhrasebankEntry;
use crate::text;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RetrievalError {
    #[error("duplicate entry id `{0}`")]
    DuplicateEntryId(String),
    #[error(transparent)]
    UnknownId(#[from] CorpusError),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default)]
    pub keywords: Vec<String>,
    pub limit: usize,
}

impl Query {
    pub fn new(limit: usize) -> Self {
        Query { limit, ..Query::default() }
    }

    pub fn validate(&self, tax: &Taxonomy) -> Result<(), CorpusError> {
        let tags = crate::phrasebank::Tags {
            section: self.section.clone(),
            component: self.component.clone(),
            strategy: self.strategy.clone(),
            messages: self.message.iter().cloned().collect(),
        };
        tags.validate(tax)
    }

    /// Distinct lower-cased keyword words.
    pub fn keyword_set(&self) -> BTreeSet<String> {
        self.keywords.iter().flat_map(|k| text::words(k)).collect()
    }
}

/// Immutable lookup structure over a phrasebank.
#[derive(Debug, Clone, Default)]
pub struct Index {
    entries: Vec<PhrasebankEntry>,
    words: Vec<BTreeSet<String>>,
    by_section: BTreeMap<String, Vec<usize>>,
    by_component: BTreeMap<String, Vec<usize>>,
    by_strategy: BTreeMap<String, Vec<usize>>,
    by_message: BTreeMap<String, Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagDimension {
    Section,
    Component,
    Strategy,
    Message,
}

pub fn build_index(entries: &[PhrasebankEntry]) -> Result<Index, RetrievalError> {
    let mut sorted: Vec<PhrasebankEntry> = entries.to_vec();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    if let Some(pair) = sorted.windows(2).find(|p| p[0].id == p[1].id) {
        return Err(RetrievalError::DuplicateEntryId(pair[0].id.clone()));
    }
    let mut idx = Index { words: sorted.iter().map(|e| e.template.fixed_words()).collect(), ..Index::default() };
    for (i, e) in sorted.iter().enumerate() {
        let post = |map: &mut BTreeMap<String, Vec<usize>>, key: &String| {
            map.entry(key.clone()).or_default().push(i);
        };
        if let Some(s) = &e.tags.section {
            post(&mut idx.by_section, s);
        }
        if let Some(c) = &e.tags.component {
            post(&mut idx.by_component, c);
        }
        if let Some(g) = &e.tags.strategy {
            post(&mut idx.by_strategy, g);
        }
        for m in &e.tags.messages {
            post(&mut idx.by_message, m);
        }
    }
    idx.entries = sorted;
    Ok(idx)
}

impl Index {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries sorted by id.
    pub fn entries(&self) -> &[PhrasebankEntry] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Option<&PhrasebankEntry> {
        self.entries
            .binary_search_by(|e| e.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.entries[i])
    }

    fn map(&self, dim: TagDimension) -> &BTreeMap<String, Vec<usize>> {
        match dim {
            TagDimension::Section => &self.by_section,
            TagDimension::Component => &self.by_component,
            TagDimension::Strategy => &self.by_strategy,
            TagDimension::Message => &self.by_message,
        }
    }

    /// Total number of postings along one tag dimension.
    pub fn postings(&self, dim: TagDimension) -> usize {
        self.map(dim).values().map(Vec::len).sum()
    }

    /// Entries matching every present filter, best keyword score first, ties
    /// by ascending id, at most `q.limit` of them.
    pub fn query(&self, q: &Query, tax: &Taxonomy) -> Result<Vec<&PhrasebankEntry>, RetrievalError> {
        q.validate(tax)?;
        if q.limit == 0 {
            return Ok(Vec::new());
        }
        let filters = [
            (TagDimension::Section, &q.section),
            (TagDimension::Component, &q.component),
            (TagDimension::Strategy, &q.strategy),
            (TagDimension::Message, &q.message),
        ];
        let mut candidates: Option<BTreeSet<usize>> = None;
        for (dim, key) in filters {
            let Some(key) = key else { continue };
            let hits: BTreeSet<usize> =
                self.map(dim).get(key).into_iter().flatten().copied().collect();
            candidates = Some(match candidates {
                None => hits,
                Some(c) => c.intersection(&hits).copied().collect(),
            });
        }
        let candidates: Vec<usize> = match candidates {
            Some(c) => c.into_iter().collect(),
            None => (0..self.entries.len()).collect(),
        };
        let keywords = q.keyword_set();
        let mut scored: Vec<(usize, usize)> = candidates
            .into_iter()
            .map(|i| (keywords.iter().filter(|k| self.words[i].contains(*k)).count(), i))
            .collect();
        // index order is id order, so ascending `i` breaks ties by id
        scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        Ok(scored.into_iter().take(q.limit).map(|(_, i)| &self.entries[i]).collect())
    }
}

/// Similarity in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimilarityScore(f64);

impl SimilarityScore {
    pub fn new(value: f64) -> Option<Self> {
        (0.0..=1.0).contains(&value).then_some(SimilarityScore(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Unit-cost Levenshtein distance over arbitrary symbols.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut row = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        row[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            row[j + 1] = sub.min(prev[j + 1] + 1).min(row[j] + 1);
        }
        core::mem::swap(&mut prev, &mut row);
    }
    prev[b.len()]
}

/// `1 - lev(a, b) / max(|a|, |b|)`; two empty sequences are identical.
pub fn sequence_similarity(a: &ComponentSequence, b: &ComponentSequence) -> SimilarityScore {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return SimilarityScore(1.0);
    }
    let d = levenshtein(a.as_slice(), b.as_slice());
    SimilarityScore(1.0 - d as f64 / longest as f64)
}

/// One step of an edit script. Positions index the sequence as it stands
/// after all earlier steps have been applied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EditOp {
    Insert { position: usize, component: String },
    Delete { position: usize, component: String },
    Substitute { position: usize, from: String, to: String },
}

/// A minimal edit script turning `from` into `to`.
pub fn edit_script(from: &[String], to: &[String]) -> Vec<EditOp> {
    let (n, m) = (from.len(), to.len());
    let mut d = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = d[i - 1][j - 1] + usize::from(from[i - 1] != to[j - 1]);
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }

    enum Step {
        Keep,
        Sub(usize, usize),
        Del(usize),
        Ins(usize),
    }
    let mut steps = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 && from[i - 1] == to[j - 1] && d[i][j] == d[i - 1][j - 1] {
            steps.push(Step::Keep);
            i -= 1;
            j -= 1;
        } else if i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + 1 {
            steps.push(Step::Sub(i - 1, j - 1));
            i -= 1;
            j -= 1;
        } else if i > 0 && d[i][j] == d[i - 1][j] + 1 {
            steps.push(Step::Del(i - 1));
            i -= 1;
        } else {
            steps.push(Step::Ins(j - 1));
            j -= 1;
        }
    }

    let mut ops = Vec::new();
    let mut pos = 0;
    for step in steps.into_iter().rev() {
        match step {
            Step::Keep => pos += 1,
            Step::Sub(a, b) => {
                ops.push(EditOp::Substitute { position: pos, from: from[a].clone(), to: to[b].clone() });
                pos += 1;
            }
            Step::Del(a) => ops.push(EditOp::Delete { position: pos, component: from[a].clone() }),
            Step::Ins(b) => {
                ops.push(EditOp::Insert { position: pos, component: to[b].clone() });
                pos += 1;
            }
        }
    }
    ops
}

pub fn apply_edit_script(seq: &[String], ops: &[EditOp]) -> Vec<String> {
    let mut out = seq.to_vec();
    for op in ops {
        match op {
            EditOp::Insert { position, component } => out.insert(*position, component.clone()),
            EditOp::Delete { position, .. } => {
                out.remove(*position);
            }
            EditOp::Substitute { position, to, .. } => out[*position] = to.clone(),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCase {
    pub case_id: String,
    pub score: SimilarityScore,
}

/// Score descending, then case id ascending.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RankedCases(pub Vec<RankedCase>);

impl RankedCases {
    pub fn best(&self) -> Option<&RankedCase> {
        self.0.first()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub(crate) fn rank_order(a: &RankedCase, b: &RankedCase) -> Ordering {
    b.score.0.total_cmp(&a.score.0).then_with(|| a.case_id.cmp(&b.case_id))
}

pub fn retrieve_similar_cases(
    cases: &[Case],
    sketch: &ComponentSequence,
    paper_type: Option<PaperType>,
    k: usize,
) -> RankedCases {
    let mut ranked: Vec<RankedCase> = cases
        .iter()
        .filter(|c| paper_type.is_none_or(|t| c.paper_type() == t))
        .map(|c| RankedCase {
            case_id: c.id().to_string(),
            score: sequence_similarity(c.sequence(), sketch),
        })
        .collect();
    ranked.sort_by(rank_order);
    ranked.truncate(k);
    RankedCases(ranked)
}

//! Mechanical checks on draft text: connectives, unfilled gaps and wordy
//! phrases, plus assembly of a section from planned passages.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{ComponentSequence, CorpusError, Taxonomy};
use crate::text::{self, match_phrase, phrase_chars, sentence_ids, Token};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RevisionError {
    #[error("unterminated gap marker at offset {offset}")]
    UnterminatedGap { offset: usize },
    #[error("connective phrase is empty")]
    EmptyPhrase,
    #[error("`{0}` is not a plain phrase of words separated by spaces")]
    InvalidPhrase(String),
    #[error("duplicate connective `{0}`")]
    DuplicatePhrase(String),
    #[error("unknown connective category `{0}`")]
    UnknownCategory(String),
    #[error("wordiness pattern is empty")]
    EmptyPattern,
    #[error("no passage for planned component `{0}`")]
    MissingPassage(String),
    #[error("passage for `{0}` is not in the plan")]
    UnplannedPassage(String),
    #[error("passage for `{0}` is empty")]
    EmptyPassage(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Contrast,
    Addition,
    Emphasis,
    Causal,
}

impl Category {
    pub const ALL: [Category; 4] =
        [Category::Contrast, Category::Addition, Category::Emphasis, Category::Causal];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Contrast => "contrast",
            Category::Addition => "addition",
            Category::Emphasis => "emphasis",
            Category::Causal => "causal",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = RevisionError;

    fn from_str(s: &str) -> Result<Self, RevisionError> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| RevisionError::UnknownCategory(s.to_string()))
    }
}

fn normalize_phrase(phrase: &str) -> Result<String, RevisionError> {
    let chars = phrase_chars(phrase);
    if chars.is_empty() {
        return Err(RevisionError::EmptyPhrase);
    }
    if !chars.iter().all(|&c| c == ' ' || text::is_word_char(c)) {
        return Err(RevisionError::InvalidPhrase(phrase.to_string()));
    }
    Ok(chars.into_iter().collect::<String>().to_lowercase())
}

/// Connective phrase → category, matched case-insensitively, longest first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, Category>", into = "BTreeMap<String, Category>")]
pub struct ConnectiveLexicon {
    phrases: BTreeMap<String, Category>,
    /// Longest first, then alphabetical.
    order: Vec<(Vec<char>, String)>,
}

impl ConnectiveLexicon {
    pub fn new<I, S>(entries: I) -> Result<Self, RevisionError>
    where
        I: IntoIterator<Item = (S, Category)>,
        S: AsRef<str>,
    {
        let mut phrases = BTreeMap::new();
        for (phrase, category) in entries {
            let key = normalize_phrase(phrase.as_ref())?;
            if phrases.insert(key.clone(), category).is_some() {
                return Err(RevisionError::DuplicatePhrase(key));
            }
        }
        let mut order: Vec<(Vec<char>, String)> =
            phrases.keys().map(|p| (p.chars().collect(), p.clone())).collect();
        order.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.1.cmp(&b.1)));
        Ok(ConnectiveLexicon { phrases, order })
    }

    pub fn phrases(&self) -> &BTreeMap<String, Category> {
        &self.phrases
    }

    pub fn category(&self, phrase: &str) -> Option<Category> {
        self.phrases.get(phrase).copied()
    }
}

impl TryFrom<BTreeMap<String, Category>> for ConnectiveLexicon {
    type Error = RevisionError;

    fn try_from(map: BTreeMap<String, Category>) -> Result<Self, RevisionError> {
        ConnectiveLexicon::new(map)
    }
}

impl From<ConnectiveLexicon> for BTreeMap<String, Category> {
    fn from(lex: ConnectiveLexicon) -> Self {
        lex.phrases
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectiveUse {
    pub category: Category,
    pub count: usize,
    /// Char offsets of each occurrence.
    pub positions: Vec<usize>,
}

/// The same connective used three or more times within two consecutive
/// sentences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepetitionWarning {
    pub connective: String,
    /// Index of the first sentence of the window.
    pub sentence: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectiveReport {
    pub connectives: BTreeMap<String, ConnectiveUse>,
    pub totals: BTreeMap<Category, usize>,
    pub warnings: Vec<RepetitionWarning>,
}

impl ConnectiveReport {
    pub fn total(&self) -> usize {
        self.totals.values().sum()
    }
}

pub const REPETITION_LIMIT: usize = 3;

pub fn connective_report(text: &str, lex: &ConnectiveLexicon) -> ConnectiveReport {
    let chars: Vec<char> = text.chars().collect();
    let mut connectives: BTreeMap<String, ConnectiveUse> = BTreeMap::new();
    let mut i = 0;
    while i < chars.len() {
        let at_word_start = text::is_word_char(chars[i]) && (i == 0 || !text::is_word_char(chars[i - 1]));
        if !at_word_start {
            i += 1;
            continue;
        }
        let hit = lex
            .order
            .iter()
            .find_map(|(phrase, key)| match_phrase(&chars, i, phrase).map(|end| (key, end)));
        match hit {
            Some((key, end)) => {
                let use_ = connectives.entry(key.clone()).or_insert_with(|| ConnectiveUse {
                    category: lex.phrases[key],
                    count: 0,
                    positions: Vec::new(),
                });
                use_.count += 1;
                use_.positions.push(i);
                i = end;
            }
            None => i += 1,
        }
    }

    let mut totals: BTreeMap<Category, usize> = Category::ALL.iter().map(|c| (*c, 0)).collect();
    for use_ in connectives.values() {
        *totals.entry(use_.category).or_default() += use_.count;
    }

    let sentence_of = sentence_ids(&chars);
    let mut warnings = Vec::new();
    for (phrase, use_) in &connectives {
        let sentences: Vec<usize> = use_.positions.iter().map(|&p| sentence_of[p]).collect();
        let Some(&last) = sentences.last() else { continue };
        let window = (0..=last).find_map(|first| {
            let n = sentences.iter().filter(|&&s| s == first || s == first + 1).count();
            (n >= REPETITION_LIMIT).then_some((first, n))
        });
        if let Some((sentence, count)) = window {
            warnings.push(RepetitionWarning { connective: phrase.clone(), sentence, count });
        }
    }
    ConnectiveReport { connectives, totals, warnings }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnfilledGap {
    pub start: usize,
    pub end: usize,
    pub label: String,
}

/// Every unescaped gap marker in `text`, in order.
pub fn find_unfilled_gaps(text: &str) -> Result<Vec<UnfilledGap>, RevisionError> {
    let tokens =
        text::scan(text).map_err(|e| RevisionError::UnterminatedGap { offset: e.offset })?;
    Ok(tokens
        .into_iter()
        .filter_map(|t| match t {
            Token::Marker { start, end, body } => {
                let label = body.split_once('|').map_or(body.as_str(), |(l, _)| l).to_string();
                Some(UnfilledGap { start, end, label })
            }
            Token::Text(_) => None,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordinessRule {
    pub pattern: String,
    pub suggestion: String,
}

impl WordinessRule {
    pub fn new(pattern: &str, suggestion: &str) -> Result<Self, RevisionError> {
        if pattern.trim().is_empty() {
            return Err(RevisionError::EmptyPattern);
        }
        Ok(WordinessRule { pattern: pattern.to_string(), suggestion: suggestion.to_string() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordinessFlag {
    pub start: usize,
    pub end: usize,
    pub pattern: String,
    pub suggestion: String,
}

/// Flags each case-insensitive, word-bounded occurrence of every rule's
/// pattern. Sorted by offset, then rule order.
pub fn wordiness_scan(text: &str, rules: &[WordinessRule]) -> Vec<WordinessFlag> {
    let chars: Vec<char> = text.chars().collect();
    let mut flags = Vec::new();
    for (r, rule) in rules.iter().enumerate() {
        let pattern = phrase_chars(&rule.pattern);
        if pattern.is_empty() {
            continue;
        }
        let mut i = 0;
        while i < chars.len() {
            match match_phrase(&chars, i, &pattern) {
                Some(end) => {
                    flags.push((i, r, end));
                    i = end;
                }
                None => i += 1,
            }
        }
    }
    flags.sort();
    flags
        .into_iter()
        .map(|(start, r, end)| WordinessFlag {
            start,
            end,
            pattern: rules[r].pattern.clone(),
            suggestion: rules[r].suggestion.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub component: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DraftChecks {
    pub connectives: ConnectiveReport,
    pub unfilled_gaps: Vec<UnfilledGap>,
    pub wordiness: Vec<WordinessFlag>,
}

/// A section assembled from planned passages, with its checks attached.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Draft {
    pub section: String,
    pub blocks: Vec<Block>,
    /// Blocks joined by blank lines; check offsets refer to this text.
    pub text: String,
    pub checks: DraftChecks,
}

pub const BLOCK_SEPARATOR: &str = "\n\n";

pub fn check_text(
    text: &str,
    lex: &ConnectiveLexicon,
    rules: &[WordinessRule],
) -> Result<DraftChecks, RevisionError> {
    Ok(DraftChecks {
        connectives: connective_report(text, lex),
        unfilled_gaps: find_unfilled_gaps(text)?,
        wordiness: wordiness_scan(text, rules),
    })
}

pub fn assemble_section(
    section: &str,
    plan: &ComponentSequence,
    passages: &BTreeMap<String, String>,
    lex: &ConnectiveLexicon,
    rules: &[WordinessRule],
    tax: &Taxonomy,
) -> Result<Draft, RevisionError> {
    plan.validate(tax, section)?;
    if let Some(c) = plan.as_slice().iter().find(|c| !passages.contains_key(*c)) {
        return Err(RevisionError::MissingPassage(c.clone()));
    }
    if let Some(c) = passages.keys().find(|c| !plan.as_slice().contains(c)) {
        return Err(RevisionError::UnplannedPassage(c.clone()));
    }
    if let Some((c, _)) = passages.iter().find(|(_, t)| t.trim().is_empty()) {
        return Err(RevisionError::EmptyPassage(c.clone()));
    }
    let blocks: Vec<Block> = plan
        .as_slice()
        .iter()
        .map(|c| Block { component: c.clone(), text: passages[c].clone() })
        .collect();
    let text = blocks.iter().map(|b| b.text.as_str()).collect::<Vec<_>>().join(BLOCK_SEPARATOR);
    let checks = check_text(&text, lex, rules)?;
    Ok(Draft { section: section.to_string(), blocks, text, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::taxonomy;
    use alloc::vec;

    fn lexicon() -> ConnectiveLexicon {
        ConnectiveLexicon::new([
            ("however", Category::Contrast),
            ("in contrast", Category::Contrast),
            ("on the other hand", Category::Contrast),
            ("other hand", Category::Addition),
            ("furthermore", Category::Addition),
            ("indeed", Category::Emphasis),
            ("because", Category::Causal),
            ("since", Category::Causal),
        ])
        .unwrap()
    }

    #[test]
    fn counts_connectives_by_category() {
        let r = connective_report("However, X failed because Y.", &lexicon());
        assert_eq!(r.totals[&Category::Contrast], 1);
        assert_eq!(r.totals[&Category::Causal], 1);
        assert_eq!(r.connectives["however"].positions, vec![0]);
        assert_eq!(r.connectives["because"].positions, vec![18]);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn empty_text_reports_zeroes() {
        let r = connective_report("", &lexicon());
        assert_eq!(r.total(), 0);
        assert_eq!(r.totals.len(), 4);
        assert!(r.connectives.is_empty() && r.warnings.is_empty());
    }

    #[test]
    fn longest_phrase_wins() {
        let r = connective_report("On the other hand, the other hand is idle.", &lexicon());
        assert_eq!(r.connectives["on the other hand"].count, 1);
        assert_eq!(r.connectives["other hand"].positions, vec![23]);
    }

    #[test]
    fn repetition_warning_within_two_sentences() {
        let text = "Indeed it works. Indeed it is fast, indeed. Later on it was slow.";
        let r = connective_report(text, &lexicon());
        assert_eq!(
            r.warnings,
            vec![RepetitionWarning { connective: "indeed".into(), sentence: 0, count: 3 }]
        );
        let spread = "Indeed a. B. Indeed c. D. Indeed e.";
        assert!(connective_report(spread, &lexicon()).warnings.is_empty());
    }

    #[test]
    fn lexicon_validation() {
        assert_eq!(
            ConnectiveLexicon::new([("However", Category::Contrast), ("however", Category::Causal)])
                .unwrap_err(),
            RevisionError::DuplicatePhrase("however".into())
        );
        assert_eq!(
            ConnectiveLexicon::new([("  ", Category::Contrast)]).unwrap_err(),
            RevisionError::EmptyPhrase
        );
        assert!(ConnectiveLexicon::new([("i.e.", Category::Addition)]).is_err());
        assert_eq!("cause".parse::<Category>(), Err(RevisionError::UnknownCategory("cause".into())));
    }

    #[test]
    fn finds_unfilled_gaps() {
        assert_eq!(
            find_unfilled_gaps("We study [[topic]]").unwrap(),
            vec![UnfilledGap { start: 9, end: 18, label: "topic".into() }]
        );
        assert!(find_unfilled_gaps(r"\[[x]]").unwrap().is_empty());
        assert_eq!(
            find_unfilled_gaps("a [[b|hint]] c [[d").unwrap_err(),
            RevisionError::UnterminatedGap { offset: 15 }
        );
    }

    #[test]
    fn flags_wordy_phrases() {
        let rules = [WordinessRule::new("in order to", "to").unwrap()];
        assert_eq!(
            wordiness_scan("in order to measure", &rules),
            vec![WordinessFlag { start: 0, end: 11, pattern: "in order to".into(), suggestion: "to".into() }]
        );
        assert!(wordiness_scan("", &rules).is_empty());
        assert!(wordiness_scan("we measure it", &rules).is_empty());
        assert!(wordiness_scan("In Order To go, in order to come", &rules).len() == 2);
        assert_eq!(WordinessRule::new(" ", "x"), Err(RevisionError::EmptyPattern));
    }

    fn passages(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(c, t)| (c.to_string(), t.to_string())).collect()
    }

    #[test]
    fn assembles_in_plan_order() {
        let plan = ComponentSequence::new(["setting", "gap", "purpose"]);
        let ps = passages(&[
            ("purpose", "This paper addresses the problem."),
            ("setting", "Lasers are common."),
            ("gap", "However, little is known about [[topic]]."),
        ]);
        let rules = [WordinessRule::new("in order to", "to").unwrap()];
        let draft = assemble_section("introduction", &plan, &ps, &lexicon(), &rules, &taxonomy()).unwrap();
        let order: Vec<&str> = draft.blocks.iter().map(|b| b.component.as_str()).collect();
        assert_eq!(order, ["setting", "gap", "purpose"]);
        assert_eq!(draft.checks.unfilled_gaps.len(), 1);
        assert_eq!(draft.checks.connectives.totals[&Category::Contrast], 1);
        assert!(draft.text.starts_with("Lasers are common.\n\nHowever"));
    }

    #[test]
    fn assembly_errors() {
        let tax = taxonomy();
        let plan = ComponentSequence::new(["gap"]);
        let err = assemble_section("introduction", &plan, &passages(&[("purpose", "x")]), &lexicon(), &[], &tax)
            .unwrap_err();
        assert_eq!(err, RevisionError::MissingPassage("gap".into()));
        let err = assemble_section(
            "introduction",
            &plan,
            &passages(&[("gap", "x"), ("purpose", "y")]),
            &lexicon(),
            &[],
            &tax,
        )
        .unwrap_err();
        assert_eq!(err, RevisionError::UnplannedPassage("purpose".into()));
        let err = assemble_section("introduction", &plan, &passages(&[("gap", " ")]), &lexicon(), &[], &tax)
            .unwrap_err();
        assert_eq!(err, RevisionError::EmptyPassage("gap".into()));
    }
}

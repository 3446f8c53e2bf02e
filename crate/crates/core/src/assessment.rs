//! Self-assessment quizzes answered with probability vectors.
//!
//! Each answer spreads probability over the choices and is scored with the
//! quadratic rule `2·p[c] − Σ p[i]²`, which is proper: a student maximises
//! the expected score only by reporting their actual beliefs. The same
//! vector places the student in one of four informedness classes.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::{Case, Taxonomy};

pub const DEFAULT_INFORMED_THRESHOLD: f64 = 0.75;
pub const DEFAULT_UNIFORM_MARGIN: f64 = 0.15;
pub const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AssessmentError {
    #[error("item `{id}`: {reason}")]
    InvalidItem { id: String, reason: String },
    #[error("response has {got} probabilities but the item has {expected} choices")]
    LengthMismatch { expected: usize, got: usize },
    #[error("probability {index} is {value}, expected a finite value ≥ 0")]
    InvalidProbability { index: usize, value: f64 },
    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("{items} items but {responses} responses")]
    CountMismatch { items: usize, responses: usize },
    #[error("thresholds out of range: informed {informed}, uniform margin {margin}")]
    InvalidThresholds { informed: f64, margin: f64 },
    #[error("sequence position {index} has no following component in case `{case}`")]
    NoFollowingComponent { case: String, index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BloomLevel {
    Knowledge,
    Comprehension,
    Application,
    Analysis,
    Synthesis,
    Evaluation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuizItem {
    pub id: String,
    pub stem: String,
    pub choices: Vec<String>,
    pub correct: usize,
    pub bloom: BloomLevel,
    pub skill: String,
}

impl QuizItem {
    pub fn validate(&self) -> Result<(), AssessmentError> {
        let invalid = |reason: String| AssessmentError::InvalidItem { id: self.id.clone(), reason };
        if self.choices.len() < 2 {
            return Err(invalid(format!("needs at least 2 choices, has {}", self.choices.len())));
        }
        if self.correct >= self.choices.len() {
            return Err(invalid(format!("correct index {} out of range", self.correct)));
        }
        Ok(())
    }
}

/// A probability vector over an item's choices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ApmResponse(pub Vec<f64>);

impl ApmResponse {
    pub fn validate(&self, choices: usize) -> Result<(), AssessmentError> {
        if self.0.len() != choices {
            return Err(AssessmentError::LengthMismatch { expected: choices, got: self.0.len() });
        }
        if let Some((index, &value)) =
            self.0.iter().enumerate().find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(AssessmentError::InvalidProbability { index, value });
        }
        let sum: f64 = self.0.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(AssessmentError::NotNormalized(sum));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub informed_threshold: f64,
    pub uniform_margin: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            informed_threshold: DEFAULT_INFORMED_THRESHOLD,
            uniform_margin: DEFAULT_UNIFORM_MARGIN,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), AssessmentError> {
        let ok = self.informed_threshold > 0.5
            && self.informed_threshold <= 1.0
            && (0.0..1.0).contains(&self.uniform_margin);
        if ok {
            Ok(())
        } else {
            Err(AssessmentError::InvalidThresholds {
                informed: self.informed_threshold,
                margin: self.uniform_margin,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Informedness {
    Informed,
    Misinformed,
    PartiallyInformed,
    Uninformed,
}

impl Informedness {
    pub const ALL: [Informedness; 4] = [
        Informedness::Informed,
        Informedness::Misinformed,
        Informedness::PartiallyInformed,
        Informedness::Uninformed,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemResult {
    pub item: String,
    pub score: f64,
    pub class: Informedness,
}

/// `2·p[correct] − Σ p[i]²`, in `[-1, 1]`.
pub fn quadratic_score(p: &[f64], correct: usize) -> f64 {
    let squares: f64 = p.iter().map(|x| x * x).sum();
    2.0 * p[correct] - squares
}

fn classify(p: &[f64], correct: usize, th: &Thresholds) -> Informedness {
    let max_wrong = p
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != correct)
        .map(|(_, x)| *x)
        .fold(0.0, f64::max);
    let max = p.iter().copied().fold(0.0, f64::max);
    if p[correct] >= th.informed_threshold {
        Informedness::Informed
    } else if max_wrong >= th.informed_threshold {
        Informedness::Misinformed
    } else if max <= 1.0 / p.len() as f64 + th.uniform_margin {
        Informedness::Uninformed
    } else {
        Informedness::PartiallyInformed
    }
}

pub fn classify_informedness(
    p: &ApmResponse,
    item: &QuizItem,
    th: &Thresholds,
) -> Result<Informedness, AssessmentError> {
    item.validate()?;
    p.validate(item.choices.len())?;
    Ok(classify(&p.0, item.correct, th))
}

pub fn score_item(
    p: &ApmResponse,
    item: &QuizItem,
    th: &Thresholds,
) -> Result<ItemResult, AssessmentError> {
    let class = classify_informedness(p, item, th)?;
    Ok(ItemResult { item: item.id.clone(), score: quadratic_score(&p.0, item.correct), class })
}

/// A quiz file: thresholds header plus items.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quiz {
    pub id: String,
    pub title: String,
    #[serde(flatten)]
    pub thresholds: Thresholds,
    pub items: Vec<QuizItem>,
}

impl Quiz {
    pub fn validate(&self) -> Result<(), AssessmentError> {
        self.thresholds.validate()?;
        self.items.iter().try_for_each(QuizItem::validate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub items: usize,
    pub mean_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuizSummary {
    pub items: usize,
    /// `None` for an empty quiz.
    pub mean_score: Option<f64>,
    pub by_bloom: BTreeMap<BloomLevel, LevelSummary>,
    pub classes: BTreeMap<Informedness, usize>,
    pub classes_by_skill: BTreeMap<String, BTreeMap<Informedness, usize>>,
    pub results: Vec<ItemResult>,
}

fn histogram() -> BTreeMap<Informedness, usize> {
    Informedness::ALL.iter().map(|c| (*c, 0)).collect()
}

pub fn grade_quiz(
    items: &[QuizItem],
    responses: &[ApmResponse],
    th: &Thresholds,
) -> Result<QuizSummary, AssessmentError> {
    if items.len() != responses.len() {
        return Err(AssessmentError::CountMismatch { items: items.len(), responses: responses.len() });
    }
    let results = items
        .iter()
        .zip(responses)
        .map(|(item, p)| score_item(p, item, th))
        .collect::<Result<Vec<_>, _>>()?;

    let mut sums: BTreeMap<BloomLevel, (usize, f64)> = BTreeMap::new();
    let mut classes = histogram();
    let mut classes_by_skill: BTreeMap<String, BTreeMap<Informedness, usize>> = BTreeMap::new();
    for (item, r) in items.iter().zip(&results) {
        let level = sums.entry(item.bloom).or_insert((0, 0.0));
        level.0 += 1;
        level.1 += r.score;
        *classes.entry(r.class).or_default() += 1;
        *classes_by_skill
            .entry(item.skill.clone())
            .or_insert_with(histogram)
            .entry(r.class)
            .or_default() += 1;
    }
    let total: f64 = results.iter().map(|r| r.score).sum();
    Ok(QuizSummary {
        items: items.len(),
        mean_score: (!results.is_empty()).then(|| total / results.len() as f64),
        by_bloom: sums
            .into_iter()
            .map(|(level, (n, sum))| (level, LevelSummary { items: n, mean_score: sum / n as f64 }))
            .collect(),
        classes,
        classes_by_skill,
        results,
    })
}

pub const ORDERING_CHOICES: usize = 4;

/// Authors a "which component follows X?" item from a case's structure.
/// Choices are the correct component plus the first other components of the
/// section, all in taxonomy order.
pub fn ordering_item(
    case: &Case,
    index: usize,
    tax: &Taxonomy,
    id: &str,
) -> Result<QuizItem, AssessmentError> {
    let seq = case.sequence().as_slice();
    let (Some(current), Some(next)) = (seq.get(index), seq.get(index + 1)) else {
        return Err(AssessmentError::NoFollowingComponent { case: case.id().to_string(), index });
    };
    let components = tax.section(case.section()).map(|s| s.components.as_slice()).unwrap_or_default();
    let name = |c: &str| {
        components.iter().find(|d| d.id == c).map_or_else(|| c.to_string(), |d| d.name.clone())
    };
    let distractors: Vec<&str> = components
        .iter()
        .map(|c| c.id.as_str())
        .filter(|c| c != next)
        .take(ORDERING_CHOICES - 1)
        .collect();
    let picked: Vec<&str> = components
        .iter()
        .map(|c| c.id.as_str())
        .filter(|c| c == next || distractors.contains(c))
        .collect();
    let correct = picked.iter().position(|c| c == next).unwrap_or_default();
    let item = QuizItem {
        id: id.to_string(),
        stem: format!("In case {}, which component follows {}?", case.id(), name(current)),
        choices: picked.into_iter().map(name).collect(),
        correct,
        bloom: BloomLevel::Comprehension,
        skill: "section-structure".to_string(),
    };
    item.validate()?;
    Ok(item)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::{document, taxonomy};
    use crate::corpus::{attach_annotations, make_case, Annotation, PaperType};
    use alloc::vec;

    fn item(m: usize, correct: usize) -> QuizItem {
        QuizItem {
            id: format!("q{m}{correct}"),
            stem: "Which section states the purpose?".into(),
            choices: (0..m).map(|i| format!("choice {i}")).collect(),
            correct,
            bloom: BloomLevel::Knowledge,
            skill: "section-role".into(),
        }
    }

    fn p(v: &[f64]) -> ApmResponse {
        ApmResponse(v.to_vec())
    }

    fn score(v: &[f64], correct: usize) -> f64 {
        score_item(&p(v), &item(v.len(), correct), &Thresholds::default()).unwrap().score
    }

    fn class(v: &[f64], correct: usize) -> Informedness {
        classify_informedness(&p(v), &item(v.len(), correct), &Thresholds::default()).unwrap()
    }

    #[test]
    fn quadratic_scores() {
        assert_eq!(score(&[1.0, 0.0, 0.0, 0.0], 0), 1.0);
        assert_eq!(score(&[0.25; 4], 0), 0.25);
        assert_eq!(score(&[0.0, 1.0, 0.0, 0.0], 0), -1.0);
    }

    #[test]
    fn informedness_classes() {
        assert_eq!(class(&[1.0, 0.0, 0.0, 0.0], 0), Informedness::Informed);
        assert_eq!(class(&[0.25; 4], 0), Informedness::Uninformed);
        assert_eq!(class(&[0.05, 0.90, 0.05], 0), Informedness::Misinformed);
        assert_eq!(class(&[0.6, 0.2, 0.2], 0), Informedness::PartiallyInformed);
        assert_eq!(class(&[0.2, 0.6, 0.2], 0), Informedness::PartiallyInformed);
        assert_eq!(class(&[0.75, 0.25], 0), Informedness::Informed);
        assert_eq!(class(&[0.35, 0.35, 0.3], 2), Informedness::Uninformed);
    }

    #[test]
    fn invalid_responses() {
        let th = Thresholds::default();
        assert_eq!(
            score_item(&p(&[0.5, 0.5]), &item(3, 0), &th).unwrap_err(),
            AssessmentError::LengthMismatch { expected: 3, got: 2 }
        );
        assert!(matches!(
            score_item(&p(&[0.5, 0.6]), &item(2, 0), &th),
            Err(AssessmentError::NotNormalized(_))
        ));
        assert!(matches!(
            score_item(&p(&[1.5, -0.5]), &item(2, 0), &th),
            Err(AssessmentError::InvalidProbability { index: 1, .. })
        ));
        assert!(matches!(
            score_item(&p(&[f64::NAN, 1.0]), &item(2, 0), &th),
            Err(AssessmentError::InvalidProbability { index: 0, .. })
        ));
        let mut bad = item(1, 0);
        bad.id = "solo".into();
        assert!(matches!(bad.validate(), Err(AssessmentError::InvalidItem { .. })));
    }

    #[test]
    fn grading_summaries() {
        let th = Thresholds::default();
        let items = vec![item(4, 0), item(4, 1)];
        let all_right = grade_quiz(&items, &[p(&[1.0, 0.0, 0.0, 0.0]), p(&[0.0, 1.0, 0.0, 0.0])], &th)
            .unwrap();
        assert_eq!(all_right.mean_score, Some(1.0));
        assert_eq!(all_right.classes[&Informedness::Informed], 2);

        let mixed = grade_quiz(&items, &[p(&[1.0, 0.0, 0.0, 0.0]), p(&[0.25; 4])], &th).unwrap();
        assert_eq!(mixed.mean_score, Some(0.625));
        assert_eq!(mixed.by_bloom[&BloomLevel::Knowledge].items, 2);
        assert_eq!(mixed.classes_by_skill["section-role"][&Informedness::Uninformed], 1);

        assert_eq!(
            grade_quiz(&[], &[p(&[1.0, 0.0])], &th).unwrap_err(),
            AssessmentError::CountMismatch { items: 0, responses: 1 }
        );
        let empty = grade_quiz(&[], &[], &th).unwrap();
        assert_eq!(empty.items, 0);
        assert_eq!(empty.mean_score, None);
        assert!(empty.by_bloom.is_empty());
    }

    #[test]
    fn authors_ordering_items_from_cases() {
        let tax = taxonomy();
        let doc = document(&"x".repeat(60));
        let anns = vec![
            Annotation::new("introduction", 0, 20, "setting"),
            Annotation::new("introduction", 20, 40, "gap"),
            Annotation::new("introduction", 40, 60, "layout"),
        ];
        let adoc = attach_annotations(doc, anns, &tax).unwrap();
        let case = make_case(&adoc, "introduction", PaperType::System).unwrap();

        let q = ordering_item(&case, 0, &tax, "ord-1").unwrap();
        assert_eq!(q.choices, ["setting", "literature-review", "gap", "purpose"]);
        assert_eq!(q.choices[q.correct], "gap");

        let q = ordering_item(&case, 1, &tax, "ord-2").unwrap();
        assert_eq!(q.choices, ["setting", "literature-review", "gap", "layout"]);
        assert_eq!(q.choices[q.correct], "layout");
        assert!(ordering_item(&case, 2, &tax, "ord-3").is_err());
    }
}

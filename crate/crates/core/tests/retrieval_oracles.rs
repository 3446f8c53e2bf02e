mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use sciwb_core::corpus::{ComponentSequence, PaperType};
use sciwb_core::phrasebank::{parse_template, PhrasebankEntry, Provenance, Tags};
use sciwb_core::retrieval::{
    apply_edit_script, build_index, edit_script, levenshtein, retrieve_similar_cases,
    sequence_similarity, Query,
};

/// Exponential-time edit distance straight from the recurrence.
fn oracle_distance(a: &[u8], b: &[u8]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) => {
            let sub = oracle_distance(ra, rb) + usize::from(x != y);
            sub.min(oracle_distance(ra, b) + 1).min(oracle_distance(a, rb) + 1)
        }
    }
}

fn oracle_similarity(a: &[u8], b: &[u8]) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        1.0
    } else {
        1.0 - oracle_distance(a, b) as f64 / longest as f64
    }
}

fn to_seq(symbols: &[u8]) -> ComponentSequence {
    ComponentSequence::new(symbols.iter().map(|s| common::INTRO[*s as usize]))
}

fn symbols(max: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..4, 0..=max)
}

#[test]
fn frozen_similarity_values() {
    // values computed with the recursive oracle
    assert_eq!(oracle_distance(&[0, 1, 2], &[0, 2]), 1);
    let v = sequence_similarity(&to_seq(&[0, 1, 2]), &to_seq(&[0, 2])).value();
    assert_eq!(v, oracle_similarity(&[0, 1, 2], &[0, 2]));
    assert_eq!(sequence_similarity(&to_seq(&[]), &to_seq(&[0, 1])).value(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn similarity_matches_oracle(a in symbols(8), b in symbols(8)) {
        let (sa, sb) = (to_seq(&a), to_seq(&b));
        let s = sequence_similarity(&sa, &sb).value();
        prop_assert_eq!(s, oracle_similarity(&a, &b));
        prop_assert_eq!(s, sequence_similarity(&sb, &sa).value());
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert_eq!(s == 1.0, a == b);
    }

    #[test]
    fn edit_script_is_minimal_and_correct(a in symbols(8), b in symbols(8)) {
        let (sa, sb) = (to_seq(&a), to_seq(&b));
        let ops = edit_script(sa.as_slice(), sb.as_slice());
        prop_assert_eq!(ops.len(), oracle_distance(&a, &b));
        prop_assert_eq!(ops.len(), levenshtein(&a, &b));
        prop_assert_eq!(apply_edit_script(sa.as_slice(), &ops), sb.0);
    }
}

fn entries() -> Vec<PhrasebankEntry> {
    let rows: [(&str, &str, &str, &[&str]); 7] = [
        ("e1", "This [[d]] addresses the [[n]]", "purpose", &["introduce"]),
        ("e2", "The [[x]] addresses this problem in [[y]]", "purpose", &["introduce", "define"]),
        ("e3", "Unlike [[x]], the [[y]] problem remains open", "gap", &["contrast"]),
        ("e4", "[[x]] is compared with [[y]]", "literature-review", &["compare"]),
        ("e5", "In contrast to [[x]], we compare [[y]]", "gap", &["compare", "contrast"]),
        ("e6", "Here we describe [[x]]", "layout", &["describe"]),
        ("e7", "The Problem of [[x]] addresses [[y]]", "setting", &[]),
    ];
    rows.iter()
        .map(|(id, t, c, ms)| {
            PhrasebankEntry::new(
                id,
                parse_template(t).unwrap(),
                Tags {
                    section: Some("introduction".into()),
                    component: Some(c.to_string()),
                    strategy: None,
                    messages: ms.iter().map(|m| m.to_string()).collect(),
                },
                Provenance::UserAuthored,
            )
            .unwrap()
        })
        .collect()
}

/// Linear scan with a naive scorer: lower-case every fixed piece, split on
/// non-word chars, count distinct keywords found.
fn linear_query(entries: &[PhrasebankEntry], q: &Query) -> Vec<String> {
    let keywords: BTreeSet<String> = q.keywords.iter().map(|k| k.to_lowercase()).collect();
    let mut hits: Vec<(usize, String)> = entries
        .iter()
        .filter(|e| q.section.as_ref().is_none_or(|s| e.tags.section.as_ref() == Some(s)))
        .filter(|e| q.component.as_ref().is_none_or(|c| e.tags.component.as_ref() == Some(c)))
        .filter(|e| q.strategy.as_ref().is_none_or(|g| e.tags.strategy.as_ref() == Some(g)))
        .filter(|e| q.message.as_ref().is_none_or(|m| e.tags.messages.contains(m)))
        .map(|e| {
            let words: BTreeSet<String> = e
                .template
                .fixed_texts()
                .flat_map(|f| {
                    f.split(|c: char| !c.is_alphanumeric() && c != '\'' && c != '_')
                        .map(str::to_lowercase)
                        .collect::<Vec<_>>()
                })
                .collect();
            (keywords.iter().filter(|k| words.contains(*k)).count(), e.id.clone())
        })
        .collect();
    hits.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    hits.into_iter().take(q.limit).map(|(_, id)| id).collect()
}

#[test]
fn both_keywords_rank_before_one() {
    let tax = common::taxonomy();
    let idx = build_index(&entries()).unwrap();
    let q = Query { keywords: vec!["addresses".into(), "problem".into()], ..Query::new(10) };
    let got: Vec<String> = idx.query(&q, &tax).unwrap().iter().map(|e| e.id.clone()).collect();
    assert_eq!(got, linear_query(&entries(), &q));
    assert_eq!(&got[..2], ["e2", "e7"]);
    assert_eq!(&got[2..4], ["e1", "e3"]);
}

proptest! {
    #[test]
    fn index_matches_linear_scan(
        component in prop::option::of(prop::sample::select(vec!["purpose", "gap", "setting", "value"])),
        message in prop::option::of(prop::sample::select(vec!["introduce", "compare", "contrast", "define"])),
        keywords in prop::collection::vec(
            prop::sample::select(vec!["the", "addresses", "PROBLEM", "we", "compare", "in", "open"]), 0..4),
        limit in 0usize..9,
    ) {
        let tax = common::taxonomy();
        let es = entries();
        let idx = build_index(&es).unwrap();
        let q = Query {
            section: None,
            component: component.map(str::to_string),
            strategy: None,
            message: message.map(str::to_string),
            keywords: keywords.iter().map(|k| k.to_string()).collect(),
            limit,
        };
        let got = idx.query(&q, &tax).unwrap();
        for e in &got {
            prop_assert!(q.component.as_ref().is_none_or(|c| e.tags.component.as_ref() == Some(c)));
            prop_assert!(q.message.as_ref().is_none_or(|m| e.tags.messages.contains(m)));
        }
        let ids: Vec<String> = got.iter().map(|e| e.id.clone()).collect();
        prop_assert_eq!(ids, linear_query(&es, &q));
    }

    #[test]
    fn case_ranking_matches_brute_force(
        base in prop::collection::vec((symbols(8), 0usize..5), 1..30),
        sketch in symbols(8),
        k in 0usize..40,
        filter in prop::option::of(0usize..5),
    ) {
        let tax = common::taxonomy();
        let cases: Vec<_> = base
            .iter()
            .enumerate()
            .filter(|(_, (s, _))| !s.is_empty())
            .map(|(i, (s, t))| {
                let ids: Vec<&str> = s.iter().map(|x| common::INTRO[*x as usize]).collect();
                common::case(&format!("c{i:02}"), &ids, PaperType::ALL[*t], &tax)
            })
            .collect();
        let paper_type = filter.map(|t| PaperType::ALL[t]);
        let got = retrieve_similar_cases(&cases, &to_seq(&sketch), paper_type, k);

        let mut expected: Vec<(f64, String)> = base
            .iter()
            .enumerate()
            .filter(|(_, (s, t))| !s.is_empty() && paper_type.is_none_or(|p| PaperType::ALL[*t] == p))
            .map(|(i, (s, _))| (oracle_similarity(s, &sketch), format!("c{i:02}/introduction")))
            .collect();
        expected.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        expected.truncate(k);
        let got: Vec<(f64, String)> = got.0.iter().map(|r| (r.score.value(), r.case_id.clone())).collect();
        prop_assert_eq!(got, expected);
    }
}

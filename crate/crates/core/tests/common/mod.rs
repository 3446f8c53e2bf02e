#![allow(dead_code)]

use std::collections::BTreeMap;

use sciwb_core::corpus::{
    attach_annotations, make_case, Annotation, Case, ComponentDef, Document, MessageDef, PaperType,
    SectionDef, SourceMeta, StrategyDef, Taxonomy,
};

pub const INTRO: [&str; 8] = [
    "setting",
    "literature-review",
    "gap",
    "purpose",
    "methodology-preview",
    "results-preview",
    "value",
    "layout",
];

pub fn taxonomy() -> Taxonomy {
    let messages = ["introduce", "describe", "compare", "contrast", "define", "confirm"];
    let components = INTRO
        .iter()
        .map(|id| ComponentDef {
            id: id.to_string(),
            name: id.replace('-', " "),
            instruction: format!("Add a {id} passage."),
            strategies: vec![StrategyDef {
                id: format!("{id}-plain"),
                name: "plain".into(),
                messages: messages.iter().map(|m| m.to_string()).collect(),
            }],
        })
        .collect();
    let section = SectionDef { id: "introduction".into(), name: "Introduction".into(), components };
    let messages = messages
        .iter()
        .map(|m| MessageDef { id: m.to_string(), verb: m.to_string(), description: String::new() })
        .collect();
    Taxonomy::new(vec![section], messages).unwrap()
}

/// A case whose introduction is annotated with `sequence`, ten chars per
/// component.
pub fn case(id: &str, sequence: &[&str], paper_type: PaperType, tax: &Taxonomy) -> Case {
    let mut sections = BTreeMap::new();
    sections.insert("introduction".to_string(), "x".repeat(10 * sequence.len().max(1)));
    let doc = Document { id: id.into(), title: id.into(), source: SourceMeta::default(), sections };
    let anns = sequence
        .iter()
        .enumerate()
        .map(|(i, c)| Annotation::new("introduction", i * 10, i * 10 + 10, c))
        .collect();
    let adoc = attach_annotations(doc, anns, tax).unwrap();
    make_case(&adoc, "introduction", paper_type).unwrap()
}

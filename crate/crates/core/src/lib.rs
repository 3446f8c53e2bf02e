//! Core model and algorithms for the scientific writing workbench.
//!
//! Everything here is pure and allocation-only: no I/O, no clocks, no
//! threads. File formats, the workspace and the CLI live in the `sciwb`
//! crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod assessment;
pub mod corpus;
pub mod critique;
pub mod phrasebank;
pub mod retrieval;
pub mod revision;
mod text;

pub use corpus::{
    attach_annotations, component_sequence, make_case, AnnotatedDocument, Annotation, Case,
    ComponentSequence, Document, PaperType, Span, Taxonomy,
};
pub use phrasebank::{
    classify_entry, combine, extract_template, fill, parse_template, render_template, Filling,
    PhrasebankEntry, Template,
};

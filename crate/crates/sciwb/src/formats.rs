//! Workspace file formats.
//!
//! Every JSON file is written with sorted keys, two-space indentation and a
//! trailing newline, so rendering a loaded value reproduces the file bytes.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use sciwb_core::corpus::{PaperType, SourceMeta};
use sciwb_core::revision::WordinessRule;
use sciwb_core::Taxonomy;

/// A file that failed to parse or validate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileError {
    pub file: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    /// JSON path of the offending value, `.` for the document root.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub message: String,
}

impl FileError {
    pub fn new(file: &str, message: impl fmt::Display) -> Self {
        FileError { file: file.to_string(), line: None, column: None, path: None, message: message.to_string() }
    }

    pub fn at_path(mut self, path: impl Into<String>) -> Self {
        self.path = Some(path.into());
        self
    }

    /// `line:column` and/or JSON path, when known.
    pub fn location(&self) -> Option<String> {
        let pos = self.line.zip(self.column).map(|(l, c)| format!("{l}:{c}"));
        match (pos, &self.path) {
            (Some(p), Some(path)) => Some(format!("{p} at {path}")),
            (Some(p), None) => Some(p),
            (None, Some(path)) => Some(path.clone()),
            (None, None) => None,
        }
    }
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.location() {
            Some(loc) => write!(f, "{}:{loc}: {}", self.file, self.message),
            None => write!(f, "{}: {}", self.file, self.message),
        }
    }
}

impl std::error::Error for FileError {}

pub fn parse_json<T: DeserializeOwned>(file: &str, bytes: &[u8]) -> Result<T, FileError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        json_error(file, &inner, Some(path))
    })?;
    de.end().map_err(|e| json_error(file, &e, None))?;
    Ok(value)
}

fn json_error(file: &str, e: &serde_json::Error, path: Option<String>) -> FileError {
    // serde_json appends " at line L column C" to its message
    let message = e.to_string();
    let message = match message.rfind(" at line ") {
        Some(i) if e.line() > 0 => message[..i].to_string(),
        _ => message,
    };
    FileError {
        file: file.to_string(),
        line: (e.line() > 0).then_some(e.line()),
        column: (e.line() > 0).then_some(e.column()),
        path: path.filter(|p| p != "."),
        message,
    }
}

pub fn render_json<T: Serialize + ?Sized>(value: &T) -> String {
    // serde_json::Value keeps object keys in a BTreeMap, which sorts them
    let value = serde_json::to_value(value).expect("workspace values serialize to JSON");
    let mut out = serde_json::to_string_pretty(&value).expect("JSON values always render");
    out.push('\n');
    out
}

pub const TAXONOMY_FILE: &str = "taxonomy.json";
pub const GUIDELINES_FILE: &str = "guidelines.json";
pub const CONNECTIVES_FILE: &str = "connectives.json";
pub const WORDINESS_FILE: &str = "wordiness.json";
pub const PHRASEBANK_FILE: &str = "phrasebank.json";
pub const CORPUS_DIR: &str = "corpus";
pub const QUIZ_DIR: &str = "quiz";
pub const META_FILE: &str = "meta.json";
pub const ANNOTATIONS_FILE: &str = "annotations.json";
pub const SECTION_EXT: &str = "txt";

pub fn load_taxonomy(bytes: &[u8]) -> Result<Taxonomy, FileError> {
    parse_json(TAXONOMY_FILE, bytes)
}

pub fn render_taxonomy(tax: &Taxonomy) -> String {
    render_json(tax)
}

/// `wordiness.json` maps each wordy pattern to its suggestion.
pub fn load_wordiness(bytes: &[u8]) -> Result<Vec<WordinessRule>, FileError> {
    let map: BTreeMap<String, String> = parse_json(WORDINESS_FILE, bytes)?;
    map.iter()
        .map(|(p, s)| {
            WordinessRule::new(p, s)
                .map_err(|e| FileError::new(WORDINESS_FILE, e).at_path(p.clone()))
        })
        .collect()
}

pub fn render_wordiness(rules: &[WordinessRule]) -> String {
    let map: BTreeMap<&str, &str> =
        rules.iter().map(|r| (r.pattern.as_str(), r.suggestion.as_str())).collect();
    render_json(&map)
}

/// `corpus/<doc-id>/meta.json`. The document id is the directory name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentMeta {
    pub title: String,
    pub paper_type: PaperType,
    #[serde(default)]
    pub source: SourceMeta,
}

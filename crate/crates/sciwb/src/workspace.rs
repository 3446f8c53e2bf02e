//! A workspace is a directory of JSON and text files. It is loaded and
//! validated as a whole; any problem rejects the load and every problem found
//! is reported.
//!
//! ```text
//! taxonomy.json  guidelines.json  connectives.json  wordiness.json
//! phrasebank.json                       (optional, empty when absent)
//! corpus/<doc-id>/meta.json
//! corpus/<doc-id>/<section-id>.txt
//! corpus/<doc-id>/annotations.json      (optional)
//! quiz/<quiz-id>.json
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use sciwb_core::assessment::Quiz;
use sciwb_core::corpus::{Annotation, Document};
use sciwb_core::critique::GuidelineSet;
use sciwb_core::phrasebank::Provenance;
use sciwb_core::retrieval::{build_index, Index, RetrievalError};
use sciwb_core::revision::{ConnectiveLexicon, WordinessRule};
use sciwb_core::{attach_annotations, make_case, AnnotatedDocument, Case, PaperType, PhrasebankEntry, Taxonomy};

use crate::formats::{
    self, parse_json, render_json, DocumentMeta, FileError, ANNOTATIONS_FILE, CONNECTIVES_FILE,
    CORPUS_DIR, GUIDELINES_FILE, META_FILE, PHRASEBANK_FILE, QUIZ_DIR, SECTION_EXT, TAXONOMY_FILE,
    WORDINESS_FILE,
};
use crate::seed;

#[derive(Debug, thiserror::Error)]
pub enum WorkspaceError {
    #[error("workspace directory {0} does not exist")]
    NotFound(PathBuf),
    #[error("{} problem(s) found:\n{}", .0.len(), list(.0))]
    Invalid(Vec<FileError>),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0} already contains a workspace")]
    AlreadyInitialized(PathBuf),
    #[error("document `{0}` is already in the corpus")]
    DuplicateDocument(String),
}

fn list(errors: &[FileError]) -> String {
    errors.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n")
}

impl WorkspaceError {
    pub fn issues(&self) -> &[FileError] {
        match self {
            WorkspaceError::Invalid(v) => v,
            _ => &[],
        }
    }
}

/// A corpus document together with its paper type.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorpusDocument {
    pub annotated: AnnotatedDocument,
    pub paper_type: PaperType,
}

impl CorpusDocument {
    pub fn id(&self) -> &str {
        &self.annotated.document().id
    }
}

#[derive(Debug, Clone)]
pub struct Workspace {
    root: PathBuf,
    taxonomy: Taxonomy,
    documents: Vec<CorpusDocument>,
    cases: Vec<Case>,
    phrasebank: Vec<PhrasebankEntry>,
    index: Index,
    guidelines: GuidelineSet,
    connectives: ConnectiveLexicon,
    wordiness: Vec<WordinessRule>,
    quizzes: BTreeMap<String, Quiz>,
    digests: BTreeMap<String, String>,
}

impl Workspace {
    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn documents(&self) -> &[CorpusDocument] {
        &self.documents
    }

    pub fn document(&self, id: &str) -> Option<&CorpusDocument> {
        self.documents.iter().find(|d| d.id() == id)
    }

    pub fn cases(&self) -> &[Case] {
        &self.cases
    }

    /// Entries sorted by id.
    pub fn phrasebank(&self) -> &[PhrasebankEntry] {
        &self.phrasebank
    }

    pub fn entry(&self, id: &str) -> Option<&PhrasebankEntry> {
        self.index.get(id)
    }

    pub fn index(&self) -> &Index {
        &self.index
    }

    pub fn guidelines(&self) -> &GuidelineSet {
        &self.guidelines
    }

    pub fn connectives(&self) -> &ConnectiveLexicon {
        &self.connectives
    }

    pub fn wordiness(&self) -> &[WordinessRule] {
        &self.wordiness
    }

    pub fn quizzes(&self) -> &BTreeMap<String, Quiz> {
        &self.quizzes
    }

    /// SHA-256 over every loaded file's path and digest, hex encoded.
    pub fn version(&self) -> String {
        let mut h = Sha256::new();
        for (path, digest) in &self.digests {
            h.update(path.as_bytes());
            h.update([0]);
            h.update(digest.as_bytes());
            h.update([0]);
        }
        hex(&h.finalize())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn digest(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

/// Collects files and problems while a workspace is read.
struct Loader<'a> {
    root: &'a Path,
    errors: Vec<FileError>,
    digests: BTreeMap<String, String>,
}

impl Loader<'_> {
    fn rel(&self, path: &Path) -> String {
        let rel = path.strip_prefix(self.root).unwrap_or(path);
        rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/")
    }

    fn read(&mut self, path: &Path, required: bool) -> Option<Vec<u8>> {
        let rel = self.rel(path);
        match fs::read(path) {
            Ok(bytes) => {
                self.digests.insert(rel, digest(&bytes));
                Some(bytes)
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound && !required => None,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                self.errors.push(FileError::new(&rel, "missing required file"));
                None
            }
            Err(e) => {
                self.errors.push(FileError::new(&rel, e));
                None
            }
        }
    }

    fn json<T: serde::de::DeserializeOwned>(&mut self, path: &Path, required: bool) -> Option<T> {
        let bytes = self.read(path, required)?;
        let rel = self.rel(path);
        parse_json(&rel, &bytes).map_err(|e| self.errors.push(e)).ok()
    }

    fn text(&mut self, path: &Path) -> Option<String> {
        let bytes = self.read(path, true)?;
        let rel = self.rel(path);
        String::from_utf8(bytes).map_err(|e| self.errors.push(FileError::new(&rel, e))).ok()
    }

    fn fail(&mut self, file: &str, message: impl std::fmt::Display) {
        self.errors.push(FileError::new(file, message));
    }

    fn list_dir(&mut self, dir: &Path) -> Vec<PathBuf> {
        match fs::read_dir(dir) {
            Ok(rd) => {
                let mut out: Vec<PathBuf> = rd.filter_map(|e| e.ok()).map(|e| e.path()).collect();
                out.retain(|p| !is_hidden(p));
                out.sort();
                out
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
            Err(e) => {
                let rel = self.rel(dir);
                self.fail(&rel, e);
                Vec::new()
            }
        }
    }
}

fn is_hidden(p: &Path) -> bool {
    p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with('.'))
}

/// Reads one `corpus/<doc-id>/` directory and validates it against `tax`.
fn load_document(ld: &mut Loader<'_>, dir: &Path, tax: Option<&Taxonomy>) -> Option<(CorpusDocument, Vec<Case>)> {
    let id = dir.file_name()?.to_string_lossy().into_owned();
    let before = ld.errors.len();
    let meta: Option<DocumentMeta> = ld.json(&dir.join(META_FILE), true);
    let anns: Vec<Annotation> = ld.json(&dir.join(ANNOTATIONS_FILE), false).unwrap_or_default();
    let mut sections = BTreeMap::new();
    for path in ld.list_dir(dir) {
        if path.extension().and_then(|e| e.to_str()) != Some(SECTION_EXT) {
            continue;
        }
        let Some(section) = path.file_stem().map(|s| s.to_string_lossy().into_owned()) else { continue };
        if let Some(text) = ld.text(&path) {
            sections.insert(section, text);
        }
    }
    let (tax, meta) = (tax?, meta?);
    if ld.errors.len() > before {
        return None;
    }
    let doc_file = ld.rel(dir);
    let doc = Document { id, title: meta.title, source: meta.source, sections };
    if let Err(e) = doc.validate(tax) {
        ld.fail(&doc_file, e);
        return None;
    }
    let ann_file = ld.rel(&dir.join(ANNOTATIONS_FILE));
    let sections_with_anns: BTreeSet<String> = anns.iter().map(|a| a.section.clone()).collect();
    let annotated = match attach_annotations(doc, anns, tax) {
        Ok(a) => a,
        Err(e) => {
            ld.fail(&ann_file, e);
            return None;
        }
    };
    let mut cases = Vec::new();
    for section in &sections_with_anns {
        match make_case(&annotated, section, meta.paper_type) {
            Ok(c) => cases.push(c),
            Err(e) => ld.fail(&ann_file, e),
        }
    }
    Some((CorpusDocument { annotated, paper_type: meta.paper_type }, cases))
}

pub fn open_workspace(root: impl AsRef<Path>) -> Result<Workspace, WorkspaceError> {
    let root = root.as_ref();
    if !root.is_dir() {
        return Err(WorkspaceError::NotFound(root.to_path_buf()));
    }
    let mut ld = Loader { root, errors: Vec::new(), digests: BTreeMap::new() };

    let taxonomy = ld.read(&root.join(TAXONOMY_FILE), true).and_then(|b| {
        formats::load_taxonomy(&b).map_err(|e| ld.errors.push(e)).ok()
    });
    let guidelines: Option<GuidelineSet> = ld.json(&root.join(GUIDELINES_FILE), true);
    let connectives: Option<ConnectiveLexicon> = ld.json(&root.join(CONNECTIVES_FILE), true);
    let wordiness = ld.read(&root.join(WORDINESS_FILE), true).and_then(|b| {
        formats::load_wordiness(&b).map_err(|e| ld.errors.push(e)).ok()
    });
    let phrasebank: Vec<PhrasebankEntry> = ld.json(&root.join(PHRASEBANK_FILE), false).unwrap_or_default();

    let mut documents = Vec::new();
    let mut cases = Vec::new();
    for dir in ld.list_dir(&root.join(CORPUS_DIR)) {
        if dir.is_dir() {
            if let Some((d, c)) = load_document(&mut ld, &dir, taxonomy.as_ref()) {
                documents.push(d);
                cases.extend(c);
            }
        }
    }

    let mut quizzes = BTreeMap::new();
    for path in ld.list_dir(&root.join(QUIZ_DIR)) {
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let rel = ld.rel(&path);
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let Some(quiz) = ld.json::<Quiz>(&path, true) else { continue };
        if quiz.id != stem {
            ld.errors.push(FileError::new(&rel, format!("quiz id `{}` does not match file name", quiz.id)).at_path("id"));
        } else if let Err(e) = quiz.validate() {
            ld.fail(&rel, e);
        } else {
            quizzes.insert(stem, quiz);
        }
    }

    let (Some(taxonomy), Some(guidelines), Some(connectives), Some(wordiness)) =
        (taxonomy, guidelines, connectives, wordiness)
    else {
        return Err(WorkspaceError::Invalid(ld.errors));
    };
    if let Err(e) = guidelines.validate(&taxonomy) {
        ld.fail(GUIDELINES_FILE, e);
    }
    let index = match check_phrasebank(&phrasebank, &taxonomy, &documents) {
        Ok(index) => Some(index),
        Err(errors) => {
            ld.errors.extend(errors);
            None
        }
    };
    match index {
        Some(index) if ld.errors.is_empty() => Ok(Workspace {
            root: root.to_path_buf(),
            taxonomy,
            documents,
            cases,
            phrasebank: index.entries().to_vec(),
            index,
            guidelines,
            connectives,
            wordiness,
            quizzes,
            digests: ld.digests,
        }),
        _ => Err(WorkspaceError::Invalid(ld.errors)),
    }
}

/// Cross-validates entries against the taxonomy and the corpus.
fn check_phrasebank(
    entries: &[PhrasebankEntry],
    tax: &Taxonomy,
    docs: &[CorpusDocument],
) -> Result<Index, Vec<FileError>> {
    let mut errors = Vec::new();
    let at = |i: usize, field: &str| format!("[{i}].{field}");
    for (i, e) in entries.iter().enumerate() {
        if let Err(err) = e.tags.validate(tax) {
            errors.push(FileError::new(PHRASEBANK_FILE, format!("entry `{}`: {err}", e.id)).at_path(at(i, "tags")));
        }
        if let Provenance::Extracted { doc, section, start, end } = &e.provenance {
            let text = docs
                .iter()
                .find(|d| d.id() == doc)
                .and_then(|d| d.annotated.document().sections.get(section));
            let problem = match text {
                None => Some(format!("entry `{}`: source {doc}/{section} is not in the corpus", e.id)),
                Some(t) if start >= end || *end > t.chars().count() => Some(format!(
                    "entry `{}`: span {start}..{end} lies outside {doc}/{section}",
                    e.id
                )),
                Some(_) => None,
            };
            if let Some(p) = problem {
                errors.push(FileError::new(PHRASEBANK_FILE, p).at_path(at(i, "provenance")));
            }
        }
    }
    match build_index(entries) {
        Ok(index) if errors.is_empty() => Ok(index),
        Ok(_) => Err(errors),
        Err(RetrievalError::DuplicateEntryId(id)) => {
            errors.push(FileError::new(PHRASEBANK_FILE, format!("duplicate entry id `{id}`")));
            Err(errors)
        }
        Err(e) => {
            errors.push(FileError::new(PHRASEBANK_FILE, e));
            Err(errors)
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> WorkspaceError + '_ {
    move |source| WorkspaceError::Io { path: path.to_path_buf(), source }
}

/// Temp file used by [`write_atomic`] for `path`: `.<name>.tmp` beside it.
pub fn temp_path(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.tmp"))
}

/// Writes to a temp file in the same directory, syncs it, then renames it
/// over `path`. On failure the previous contents of `path` are untouched.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), WorkspaceError> {
    let tmp = temp_path(path);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() && tmp.is_file() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err(path))
}

/// Validates `entries` against the workspace, replaces `phrasebank.json`
/// atomically and returns the updated workspace.
pub fn save_phrasebank(ws: &Workspace, entries: Vec<PhrasebankEntry>) -> Result<Workspace, WorkspaceError> {
    let index = check_phrasebank(&entries, &ws.taxonomy, &ws.documents).map_err(WorkspaceError::Invalid)?;
    let sorted = index.entries().to_vec();
    let bytes = render_json(&sorted);
    write_atomic(&ws.root.join(PHRASEBANK_FILE), bytes.as_bytes())?;
    let mut next = ws.clone();
    next.digests.insert(PHRASEBANK_FILE.to_string(), digest(bytes.as_bytes()));
    next.phrasebank = sorted;
    next.index = index;
    Ok(next)
}

/// Writes the bundled seed workspace into `root`, which must not already
/// hold a taxonomy.
pub fn init_workspace(root: &Path) -> Result<Workspace, WorkspaceError> {
    if root.join(TAXONOMY_FILE).exists() {
        return Err(WorkspaceError::AlreadyInitialized(root.to_path_buf()));
    }
    for (rel, content) in seed::FILES {
        let path = root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        write_atomic(&path, content.as_bytes())?;
    }
    open_workspace(root)
}

fn copy_dir(from: &Path, to: &Path) -> io::Result<()> {
    fs::create_dir_all(to)?;
    for entry in fs::read_dir(from)? {
        let entry = entry?;
        let path = entry.path();
        if entry.file_type()?.is_file() && !is_hidden(&path) {
            fs::copy(&path, to.join(entry.file_name()))?;
        }
    }
    Ok(())
}

/// Validates a document directory laid out like `corpus/<doc-id>/` and
/// copies it into the corpus. The directory name is the document id.
pub fn ingest(ws: &Workspace, doc_dir: &Path) -> Result<Workspace, WorkspaceError> {
    let parent = doc_dir.parent().unwrap_or(Path::new(""));
    let mut ld = Loader { root: parent, errors: Vec::new(), digests: BTreeMap::new() };
    let loaded = load_document(&mut ld, doc_dir, Some(&ws.taxonomy));
    let Some((doc, _)) = loaded.filter(|_| ld.errors.is_empty()) else {
        return Err(WorkspaceError::Invalid(ld.errors));
    };
    if ws.document(doc.id()).is_some() {
        return Err(WorkspaceError::DuplicateDocument(doc.id().to_string()));
    }
    let corpus = ws.root.join(CORPUS_DIR);
    let target = corpus.join(doc.id());
    let staging = corpus.join(format!(".{}.tmp", doc.id()));
    let staged = (|| {
        if staging.exists() {
            fs::remove_dir_all(&staging)?;
        }
        copy_dir(doc_dir, &staging)?;
        fs::rename(&staging, &target)
    })();
    if let Err(e) = staged {
        let _ = fs::remove_dir_all(&staging);
        return Err(WorkspaceError::Io { path: target, source: e });
    }
    open_workspace(&ws.root)
}

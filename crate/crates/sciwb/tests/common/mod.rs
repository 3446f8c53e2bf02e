#![allow(dead_code)]

use std::path::{Path, PathBuf};

use tempfile::TempDir;

use sciwb::workspace::init_workspace;
use sciwb::Workspace;

pub fn seed() -> (TempDir, Workspace) {
    let dir = tempfile::tempdir().unwrap();
    let ws = init_workspace(dir.path()).unwrap();
    (dir, ws)
}

pub fn fixture_doc() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/ingest/doc-sensor-drift")
}

/// Char offsets of the first occurrence of `needle` in `hay`.
pub fn char_span(hay: &str, needle: &str) -> (usize, usize) {
    let byte = hay.find(needle).unwrap_or_else(|| panic!("`{needle}` not in text"));
    let start = hay[..byte].chars().count();
    (start, start + needle.chars().count())
}

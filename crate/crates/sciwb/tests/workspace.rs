mod common;

use std::fs;

use sciwb::formats::{render_json, render_taxonomy, render_wordiness, PHRASEBANK_FILE, TAXONOMY_FILE};
use sciwb::workspace::{ingest, init_workspace, save_phrasebank, temp_path};
use sciwb::{open_workspace, WorkspaceError};
use sciwb_core::phrasebank::{parse_template, Provenance, Tags};
use sciwb_core::PhrasebankEntry;

#[test]
fn seed_opens_cleanly_with_expected_capacity() {
    let (_dir, ws) = common::seed();
    let tax = ws.taxonomy();
    let ids: Vec<&str> = tax.sections().iter().map(|s| s.id.as_str()).collect();
    assert_eq!(ids, ["abstract", "introduction", "review", "methodology", "results", "discussion", "conclusion"]);
    let intro = tax.section("introduction").unwrap();
    let comps: Vec<&str> = intro.components.iter().map(|c| c.id.as_str()).collect();
    assert_eq!(
        comps,
        ["setting", "literature-review", "gap", "purpose", "methodology-preview", "results-preview", "value", "layout"]
    );
    assert!(intro.components.iter().map(|c| c.strategies.len()).sum::<usize>() >= 30);
    assert!(tax.strategy_count() >= 30);
    assert!(tax.messages().len() >= 45);
    for m in ["describe", "contrast", "confirm", "define", "compare", "introduce"] {
        assert!(tax.message(m).is_some(), "{m}");
    }
    assert!(ws.documents().len() >= 5);
    assert!(ws.cases().iter().all(|c| c.section() == "introduction"));
    assert!(ws.phrasebank().len() >= 40);
    assert!(ws.phrasebank().iter().all(|e| e.template.gap_count() >= 1));
    let quiz = &ws.quizzes()["intro-structure"];
    assert_eq!(quiz.items.len(), 10);
    let levels: std::collections::BTreeSet<_> = quiz.items.iter().map(|i| i.bloom).collect();
    assert!(levels.len() >= 4);
}

#[test]
fn every_store_renders_back_to_its_file() {
    let (dir, ws) = common::seed();
    let read = |rel: &str| fs::read_to_string(dir.path().join(rel)).unwrap();
    assert_eq!(render_taxonomy(ws.taxonomy()), read("taxonomy.json"));
    assert_eq!(render_json(ws.guidelines()), read("guidelines.json"));
    assert_eq!(render_json(ws.connectives()), read("connectives.json"));
    assert_eq!(render_wordiness(ws.wordiness()), read("wordiness.json"));
    assert_eq!(render_json(ws.phrasebank()), read("phrasebank.json"));
    assert_eq!(render_json(&ws.quizzes()["intro-structure"]), read("quiz/intro-structure.json"));
    for d in ws.documents() {
        let rel = format!("corpus/{}/annotations.json", d.id());
        assert_eq!(render_json(d.annotated.annotations()), read(&rel));
    }
}

#[test]
fn open_save_open_is_identity() {
    let (dir, ws) = common::seed();
    let before = fs::read(dir.path().join(PHRASEBANK_FILE)).unwrap();
    let saved = save_phrasebank(&ws, ws.phrasebank().to_vec()).unwrap();
    assert_eq!(fs::read(dir.path().join(PHRASEBANK_FILE)).unwrap(), before);
    let again = open_workspace(dir.path()).unwrap();
    assert_eq!(again.phrasebank(), ws.phrasebank());
    assert_eq!(again.taxonomy(), ws.taxonomy());
    assert_eq!(again.documents(), ws.documents());
    assert_eq!(again.cases(), ws.cases());
    assert_eq!(again.guidelines(), ws.guidelines());
    assert_eq!(again.connectives(), ws.connectives());
    assert_eq!(again.wordiness(), ws.wordiness());
    assert_eq!(again.quizzes(), ws.quizzes());
    assert_eq!(again.version(), ws.version());
    assert_eq!(saved.version(), ws.version());
}

#[test]
fn saving_sorts_and_reopens_equal() {
    let (dir, ws) = common::seed();
    let mut entries = ws.phrasebank().to_vec();
    entries.reverse();
    entries.push(
        PhrasebankEntry::new(
            "aaa-new",
            parse_template("Little is known about [[x]].").unwrap(),
            Tags::default(),
            Provenance::UserAuthored,
        )
        .unwrap(),
    );
    let saved = save_phrasebank(&ws, entries).unwrap();
    assert_eq!(saved.phrasebank()[0].id, "aaa-new");
    assert_ne!(saved.version(), ws.version());
    let again = open_workspace(dir.path()).unwrap();
    assert_eq!(again.phrasebank(), saved.phrasebank());
    assert_eq!(again.version(), saved.version());
}

#[test]
fn empty_phrasebank_is_a_valid_store() {
    let (dir, ws) = common::seed();
    let saved = save_phrasebank(&ws, Vec::new()).unwrap();
    assert!(saved.phrasebank().is_empty());
    assert_eq!(fs::read_to_string(dir.path().join(PHRASEBANK_FILE)).unwrap(), "[]\n");
    assert!(open_workspace(dir.path()).unwrap().phrasebank().is_empty());
    fs::remove_file(dir.path().join(PHRASEBANK_FILE)).unwrap();
    assert!(open_workspace(dir.path()).unwrap().phrasebank().is_empty());
}

#[test]
fn failed_write_leaves_previous_bytes() {
    let (dir, ws) = common::seed();
    let path = dir.path().join(PHRASEBANK_FILE);
    let before = fs::read(&path).unwrap();
    // a directory squatting on the temp path makes the write fail
    fs::create_dir(temp_path(&path)).unwrap();
    let err = save_phrasebank(&ws, Vec::new()).unwrap_err();
    assert!(matches!(err, WorkspaceError::Io { .. }), "{err}");
    assert_eq!(fs::read(&path).unwrap(), before);
    fs::remove_dir(temp_path(&path)).unwrap();
    assert_eq!(open_workspace(dir.path()).unwrap().phrasebank(), ws.phrasebank());
}

#[test]
fn invalid_entries_are_rejected_before_writing() {
    let (dir, ws) = common::seed();
    let path = dir.path().join(PHRASEBANK_FILE);
    let before = fs::read(&path).unwrap();
    let mut bad = ws.phrasebank()[0].clone();
    bad.tags.component = Some("no-such-component".into());
    let mut dup = ws.phrasebank().to_vec();
    dup.push(ws.phrasebank()[1].clone());
    for entries in [vec![bad], dup] {
        assert!(matches!(save_phrasebank(&ws, entries), Err(WorkspaceError::Invalid(_))));
        assert_eq!(fs::read(&path).unwrap(), before);
    }
}

#[test]
fn missing_taxonomy_is_reported() {
    let (dir, _ws) = common::seed();
    fs::remove_file(dir.path().join(TAXONOMY_FILE)).unwrap();
    let err = open_workspace(dir.path()).unwrap_err();
    assert!(err.issues().iter().any(|e| e.file == "taxonomy.json" && e.message == "missing required file"), "{err}");
}

#[test]
fn all_problems_are_reported_together() {
    let (dir, _ws) = common::seed();
    let pb = dir.path().join(PHRASEBANK_FILE);
    let text = fs::read_to_string(&pb).unwrap();
    fs::write(&pb, text.replacen("\"component\": \"purpose\"", "\"component\": \"conclusion-of-sorts\"", 1)).unwrap();
    fs::write(dir.path().join("quiz/intro-structure.json"), "{").unwrap();
    fs::write(dir.path().join("wordiness.json"), "{\"  \": \"x\"}\n").unwrap();
    let err = open_workspace(dir.path()).unwrap_err();
    let files: Vec<&str> = err.issues().iter().map(|e| e.file.as_str()).collect();
    assert!(files.contains(&"quiz/intro-structure.json"), "{err}");
    assert!(files.contains(&"wordiness.json"), "{err}");
    // the phrasebank is cross-validated only once its dependencies load
    fs::write(dir.path().join("wordiness.json"), "{}\n").unwrap();
    fs::write(dir.path().join("quiz/intro-structure.json"), "{}").unwrap();
    let err = open_workspace(dir.path()).unwrap_err();
    let files: Vec<&str> = err.issues().iter().map(|e| e.file.as_str()).collect();
    assert!(files.contains(&"phrasebank.json"), "{err}");
    assert!(files.contains(&"quiz/intro-structure.json"), "{err}");
    assert!(err.to_string().contains("conclusion-of-sorts"), "{err}");
}

#[test]
fn taxonomy_errors_carry_a_location() {
    let err = sciwb::formats::load_taxonomy(b"").unwrap_err();
    assert_eq!(err.file, "taxonomy.json");
    assert!(err.message.contains("EOF"), "{err}");

    let err = sciwb::formats::load_taxonomy(b"{\"sections\": [{\"id\": 3}], \"messages\": []}").unwrap_err();
    assert_eq!(err.line, Some(1));
    assert_eq!(err.path.as_deref(), Some("sections[0].id"));

    let (dir, _ws) = common::seed();
    let text = fs::read_to_string(dir.path().join(TAXONOMY_FILE)).unwrap();
    let dup = text.replacen("\"id\": \"purpose\"", "\"id\": \"gap\"", 1);
    let err = sciwb::formats::load_taxonomy(dup.as_bytes()).unwrap_err();
    assert!(err.message.contains("duplicate") && err.message.contains("gap"), "{err}");
    assert!(err.message.contains("sections[1].components[3]"), "{err}");
}

#[test]
fn ingest_adds_a_case_and_rejects_duplicates() {
    let (dir, ws) = common::seed();
    let n = ws.cases().len();
    let ws = ingest(&ws, &common::fixture_doc()).unwrap();
    assert_eq!(ws.cases().len(), n + 1);
    assert!(ws.cases().iter().any(|c| c.id() == "doc-sensor-drift/introduction"));
    assert!(dir.path().join("corpus/doc-sensor-drift/introduction.txt").is_file());
    assert!(matches!(ingest(&ws, &common::fixture_doc()), Err(WorkspaceError::DuplicateDocument(_))));
}

#[test]
fn ingest_rejects_bad_annotations_without_touching_the_corpus() {
    let (dir, ws) = common::seed();
    let src = tempfile::tempdir().unwrap();
    let doc = src.path().join("doc-broken");
    fs::create_dir(&doc).unwrap();
    for f in ["meta.json", "introduction.txt"] {
        fs::copy(common::fixture_doc().join(f), doc.join(f)).unwrap();
    }
    fs::write(
        doc.join("annotations.json"),
        r#"[{"section":"introduction","start":0,"end":20,"component":"setting"},
            {"section":"introduction","start":10,"end":30,"component":"gap"}]"#,
    )
    .unwrap();
    let err = ingest(&ws, &doc).unwrap_err();
    assert!(err.to_string().contains("overlap"), "{err}");
    assert!(!dir.path().join("corpus/doc-broken").exists());
}

#[test]
fn init_refuses_an_existing_workspace() {
    let (dir, _ws) = common::seed();
    assert!(matches!(init_workspace(dir.path()), Err(WorkspaceError::AlreadyInitialized(_))));
}

mod common;

use std::fs;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use sciwb::server::router;
use sciwb::open_workspace;

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn app() -> (tempfile::TempDir, Router) {
    let (dir, ws) = common::seed();
    (dir, router(ws))
}

fn assert_error_shape(body: &Value) {
    let obj = body.as_object().expect("error body is an object");
    assert!(obj["error"].is_string() && obj["detail"].is_string(), "{body}");
    assert!(obj.keys().all(|k| ["error", "detail", "location"].contains(&k.as_str())), "{body}");
}

#[tokio::test]
async fn taxonomy_matches_file_after_normalization() {
    let (dir, app) = app();
    let (status, body) = call(&app, "GET", "/api/taxonomy", None).await;
    assert_eq!(status, StatusCode::OK);
    let file: Value = serde_json::from_slice(&fs::read(dir.path().join("taxonomy.json")).unwrap()).unwrap();
    assert_eq!(body, file);
}

#[tokio::test]
async fn fill_reproduces_the_grid_sentence() {
    let (_dir, app) = app();
    let req = json!({"template": "This [[doc-type|paper]] addresses the [[topic]]", "fillers": ["paper", "problem"]});
    let (status, body) = call(&app, "POST", "/api/templates/fill", Some(req)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!({"text": "This paper addresses the problem"}));

    let req = json!({"entry": "grid-verb", "fillers": ["letter", "analyzes", "case"]});
    let (_, body) = call(&app, "POST", "/api/templates/fill", Some(req)).await;
    assert_eq!(body, json!({"text": "This letter analyzes the case"}));

    let req = json!({"entry": "grid-verb", "fillers": ["letter"]});
    let (status, body) = call(&app, "POST", "/api/templates/fill", Some(req)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "invalid filling");
    assert_error_shape(&body);

    let req = json!({"template": "[[x]] and [[y]]", "fillers": ["a [[b]]", "c"]});
    let (_, body) = call(&app, "POST", "/api/templates/fill", Some(req)).await;
    assert_eq!(body, json!({"text": "a \\[[b]] and c"}));
}

#[tokio::test]
async fn parse_and_combine() {
    let (_dir, app) = app();
    let (status, body) =
        call(&app, "POST", "/api/templates/parse", Some(json!({"template": "\\[[not a gap]] [[x]]"}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        body["segments"],
        json!([{"type": "fixed", "text": "[[not a gap]] "}, {"type": "gap", "label": "x"}])
    );
    let (status, body) =
        call(&app, "POST", "/api/templates/parse", Some(json!({"template": "plain sentence with no gap"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "invalid template");
    let (_, body) = call(&app, "POST", "/api/templates/parse", Some(json!({"template": "a [[x"}))).await;
    assert_eq!(body["location"], "offset 2");

    let req = json!({"parts": [{"entry": "auth-few-studies"}, {"entry": "grid-addresses"}], "separator": " "});
    let (status, body) = call(&app, "POST", "/api/templates/combine", Some(req)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["gap_count"], 3);
    assert_eq!(
        body["template"],
        "To date, few studies have investigated [[topic]]. This [[doc-type|paper]] addresses the [[topic|problem]]"
    );
    let (status, _) = call(&app, "POST", "/api/templates/combine", Some(json!({"parts": []}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn phrasebank_filters_and_ranks() {
    let (_dir, app) = app();
    let (status, body) = call(&app, "GET", "/api/phrasebank?component=gap&q=however&k=3", None).await;
    assert_eq!(status, StatusCode::OK);
    let hits = body.as_array().unwrap();
    assert!(!hits.is_empty() && hits.len() <= 3);
    assert!(hits.iter().all(|e| e["tags"]["component"] == "gap"));
    assert!(hits[0]["template"].as_str().unwrap().contains("However"));

    let (_, body) = call(&app, "GET", "/api/phrasebank?message=compare&k=100", None).await;
    assert!(body.as_array().unwrap().iter().all(|e| e["tags"]["messages"].as_array().unwrap().contains(&json!("compare"))));

    let (status, body) = call(&app, "GET", "/api/phrasebank?message=obfuscate", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "unknown id");
    let (status, body) = call(&app, "GET", "/api/phrasebank?k=many", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error_shape(&body);
}

#[tokio::test]
async fn critique_and_sessions() {
    let (_dir, app) = app();
    let (_, cases) = call(&app, "GET", "/api/cases", None).await;
    let first = &cases.as_array().unwrap()[0];
    let req = json!({"paper_type": first["paper_type"], "sequence": first["sequence"]});
    let (status, report) = call(&app, "POST", "/api/critique", Some(req)).await;
    assert_eq!(status, StatusCode::OK);
    let kinds: Vec<&str> = report["critiques"].as_array().unwrap().iter().map(|c| c["type"].as_str().unwrap()).collect();
    assert!(kinds.contains(&"compliment"));
    assert!(!kinds.contains(&"direct_criticism"));

    let missing = json!({"paper_type": "empirical", "sequence": ["setting", "literature-review", "gap"]});
    let (_, step1) = call(&app, "POST", "/api/critique/session/s1", Some(missing)).await;
    assert_eq!(step1["cycle"], 1);
    let count = |v: &Value, k: &str| v["report"]["critiques"].as_array().unwrap().iter().filter(|c| c["type"] == k).count();
    assert_eq!(count(&step1, "direct_criticism"), 1);
    assert_eq!(count(&step1, "instruction"), 1);
    let fixed = json!({"paper_type": "empirical", "sequence": ["setting", "literature-review", "gap", "purpose"]});
    let (_, step2) = call(&app, "POST", "/api/critique/session/s1", Some(fixed)).await;
    assert_eq!(step2["cycle"], 2);
    assert_eq!(count(&step2, "direct_criticism"), 0);

    let bad = json!({"paper_type": "survey", "sequence": ["gap"]});
    let (status, body) = call(&app, "POST", "/api/critique/session/s1", Some(bad)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["location"], "paper_type");
    let again = json!({"paper_type": "empirical", "sequence": ["gap"]});
    let (_, step3) = call(&app, "POST", "/api/critique/session/s1", Some(again)).await;
    assert_eq!(step3["cycle"], 3, "failed step must not count as a cycle");
}

#[tokio::test]
async fn critique_without_cases_is_a_conflict() {
    let (dir, _ws) = common::seed();
    fs::remove_dir_all(dir.path().join("corpus")).unwrap();
    fs::remove_file(dir.path().join("phrasebank.json")).unwrap();
    let app = router(open_workspace(dir.path()).unwrap());
    let req = json!({"paper_type": "empirical", "sequence": ["setting", "gap", "purpose"]});
    let (status, body) = call(&app, "POST", "/api/critique", Some(req)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"], "empty case base");
    assert_error_shape(&body);
}

#[tokio::test]
async fn quiz_answers_are_graded() {
    let (_dir, app) = app();
    let mut responses = vec![json!([1.0, 0.0, 0.0, 0.0])];
    responses.extend((0..9).map(|_| json!([0.25, 0.25, 0.25, 0.25])));
    let (status, body) =
        call(&app, "POST", "/api/quiz/intro-structure/answers", Some(json!({"responses": responses}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["items"], 10);
    assert_eq!(body["results"][0]["class"], "informed");
    assert_eq!(body["results"][0]["score"], 1.0);
    assert_eq!(body["classes"]["uninformed"], 9);

    let (status, body) =
        call(&app, "POST", "/api/quiz/intro-structure/answers", Some(json!({"responses": [[0.5, 0.2, 0.2, 0.2]]}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error_shape(&body);
    let (status, _) = call(&app, "POST", "/api/quiz/nope/answers", Some(json!({"responses": []}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn checks_over_get_and_post_agree() {
    let (_dir, app) = app();
    let text = "However, [[topic]] is open. In order to test it, we measured it.";
    let (status, post) = call(&app, "POST", "/api/checks", Some(json!({"text": text}))).await;
    assert_eq!(status, StatusCode::OK);
    let encoded: String = text
        .bytes()
        .map(|b| if b.is_ascii_alphanumeric() { (b as char).to_string() } else { format!("%{b:02X}") })
        .collect();
    let (status, get) = call(&app, "GET", &format!("/api/checks?text={encoded}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(get, post);
    assert_eq!(post["unfilled_gaps"][0]["label"], "topic");
    assert_eq!(post["connectives"]["connectives"]["however"]["count"], 1);
    assert_eq!(post["wordiness"][0]["suggestion"], "to");
}

#[tokio::test]
async fn malformed_requests_get_error_bodies() {
    let (_dir, app) = app();
    let (status, body) = call(&app, "POST", "/api/templates/fill", Some(json!({"fillers": 3}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "invalid request body");
    let (status, body) = call(&app, "GET", "/api/nowhere", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error_shape(&body);
}

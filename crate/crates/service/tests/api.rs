use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use engage_core::corpus::{default_group_registry, Corpus};
use engage_core::filtering::{filter_corpus, FilteredSet};
use engage_core::keyness::KeywordList;
use engage_core::normalize::NormalizationConfig;
use engage_core::reliability::{align_annotations, percent_agreement, AnnotationSet, DEFAULT_OVERLAP_THRESHOLD};
use engage_core::MessageAnnotation;
use engage_service::{app_state, router, CodingService, ManualClock, TOKEN_HEADER};
use engage_testkit::fixtures::{segment, transcript};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

/// Four transcripts of 60 segments; every other segment mentions the keyword,
/// so a zero-window filter retains 120 segments.
fn corpus_and_set() -> (Corpus, FilteredSet) {
    let transcripts = (0..4)
        .map(|t| {
            let segs = (0..60)
                .map(|i| {
                    let text = if i % 2 == 0 { "hoy hacemos la tarea" } else { "abrid el libro" };
                    segment(i, text, 4)
                })
                .collect();
            transcript(&format!("t{t}"), 9 + t as u8, 1, segs)
        })
        .collect();
    let corpus = Corpus::new(transcripts, default_group_registry()).unwrap();
    let list = KeywordList::new("tarea-list", vec!["tarea".into()]).unwrap();
    let filtered = filter_corpus(&corpus, &list, 0, &NormalizationConfig::default()).unwrap();
    let set = FilteredSet::build(&corpus, &filtered, "tarea-list", "abc123", 0).unwrap();
    (corpus, set)
}

struct Harness {
    app: Router,
    clock: ManualClock,
    _dir: tempfile::TempDir,
}

fn harness_in(dir: &Path, clock: ManualClock, token: Option<&str>) -> Router {
    let service = CodingService::open(dir, Arc::new(clock), 60_000, 5).unwrap();
    router(app_state(service, token.map(String::from)), None)
}

fn harness() -> Harness {
    let dir = tempfile::tempdir().unwrap();
    let clock = ManualClock::new(1_000_000);
    Harness {
        app: harness_in(dir.path(), clock.clone(), None),
        clock,
        _dir: dir,
    }
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = call_raw(app, method, uri, body, None).await;
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

async fn call_raw(
    app: &Router,
    method: &str,
    uri: &str,
    body: Option<Value>,
    token: Option<&str>,
) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        req = req.header(TOKEN_HEADER, t);
    }
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn upload(app: &Router) -> FilteredSet {
    let (corpus, set) = corpus_and_set();
    let (status, body) = call(
        app,
        "POST",
        "/corpora",
        Some(json!({ "corpus_id": "c1", "corpus": corpus, "filtered_sets": [set] })),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    set
}

async fn session(app: &Router, roster: &[&str], policy: Value) -> (StatusCode, Value) {
    call(
        app,
        "POST",
        "/sessions",
        Some(json!({
            "corpus_id": "c1",
            "filtered": { "list_name": "tarea-list", "config_hash": "abc123" },
            "roster": roster,
            "policy": policy,
        })),
    )
    .await
}

async fn next(app: &Router, session: &str, coder: &str) -> Value {
    let (status, body) = call(app, "GET", &format!("/sessions/{session}/next?coder={coder}"), None).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    body
}

fn message(frame: &str, appeal: &str) -> Value {
    json!({ "kind": "message", "frame": frame, "appeal": appeal })
}

async fn submit(app: &Router, session: &str, coder: &str, item: &str, decision: Value) -> (StatusCode, Value) {
    call(
        app,
        "POST",
        &format!("/sessions/{session}/annotations"),
        Some(json!({ "coder": coder, "item_id": item, "decision": decision })),
    )
    .await
}

fn assert_error(body: &Value, code: &str) {
    assert_eq!(body["code"], code, "{body}");
    assert!(body["message"].is_string());
    assert!(body.get("details").is_some());
}

#[tokio::test]
async fn health_and_unknown_route() {
    let h = harness();
    let (status, body) = call(&h.app, "GET", "/health", None).await;
    assert_eq!((status, body["status"].as_str()), (StatusCode::OK, Some("ok")));
    let (status, body) = call(&h.app, "GET", "/nowhere", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&body, "NoRoute");
}

#[tokio::test]
async fn corpus_upload_rules() {
    let h = harness();
    upload(&h.app).await;
    // Same content again is fine.
    upload(&h.app).await;
    let (status, body) = call(&h.app, "GET", "/corpora/c1", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["transcripts"], 4);
    assert_eq!(body["segments"], 240);
    assert_eq!(body["filtered_sets"][0]["list_name"], "tarea-list");

    let (mut corpus, _) = corpus_and_set();
    corpus.transcripts[0].segments[0].text = "otra cosa".into();
    let (status, body) = call(&h.app, "POST", "/corpora", Some(json!({ "corpus_id": "c1", "corpus": corpus }))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error(&body, "CorpusConflict");

    let (status, body) = call_raw(&h.app, "POST", "/corpora", None, None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&serde_json::from_slice(&body).unwrap(), "BadRequest");

    let (status, body) = call(&h.app, "GET", "/corpora/zzz", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&body, "UnknownCorpus");
}

#[tokio::test]
async fn filtered_sets_are_checked_against_the_corpus() {
    let h = harness();
    let mut set = upload(&h.app).await;
    set.config_hash = "def456".into();
    let (status, body) = call(&h.app, "POST", "/corpora/c1/filtered", Some(json!(set))).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(body["config_hash"], "def456");

    set.transcripts[0].segments[0].id = "bogus".into();
    let (status, body) = call(&h.app, "POST", "/corpora/c1/filtered", Some(json!(set))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&body, "InvalidFilteredSet");

    let (status, body) = call(&h.app, "POST", "/corpora/nope/filtered", Some(json!(set))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&body, "UnknownCorpus");
}

#[tokio::test]
async fn session_creation() {
    let h = harness();
    upload(&h.app).await;
    let (status, s1) = session(&h.app, &["ana"], json!({ "kind": "single" })).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(s1["items_total"], 120);
    assert_eq!(s1["status"], "open");

    let (_, s2) = session(&h.app, &["ana"], json!({ "kind": "single" })).await;
    assert_ne!(s1["id"], s2["id"]);

    let (status, body) = session(&h.app, &["ana"], json!({ "kind": "double" })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&body, "DoubleNeedsTwo");

    let (status, body) = session(&h.app, &[], json!({ "kind": "single" })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&body, "EmptyRoster");

    let (status, body) = call(
        &h.app,
        "POST",
        "/sessions",
        Some(json!({
            "corpus_id": "c1",
            "filtered": { "list_name": "tarea-list", "config_hash": "nope" },
            "roster": ["ana"],
            "policy": { "kind": "single" },
        })),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&body, "UnknownFilteredSet");

    let (status, body) = call(
        &h.app,
        "POST",
        "/sessions",
        Some(json!({ "corpus_id": "zz", "filtered": { "list_name": "x", "config_hash": "y" }, "roster": ["a"], "policy": { "kind": "single" } })),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&body, "UnknownCorpus");

    let (status, body) = call(&h.app, "GET", "/sessions/session-0099", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&body, "UnknownSession");
}

#[tokio::test]
async fn identical_sessions_have_identical_queues() {
    let h = harness();
    upload(&h.app).await;
    let mut orders = Vec::new();
    for _ in 0..2 {
        let (_, s) = session(&h.app, &["ana", "luis"], json!({ "kind": "single" })).await;
        let id = s["id"].as_str().unwrap().to_owned();
        let mut seen = Vec::new();
        for coder in ["ana", "luis"] {
            loop {
                let n = next(&h.app, &id, coder).await;
                if n["status"] == "done" {
                    break;
                }
                seen.push((coder, n["item"]["item_id"].as_str().unwrap().to_owned()));
            }
        }
        orders.push(seen);
    }
    assert_eq!(orders[0], orders[1]);
    assert_eq!(orders[0].len(), 120);
}

#[tokio::test]
async fn next_item_and_leases() {
    let h = harness();
    upload(&h.app).await;
    let (_, s) = session(&h.app, &["ana", "luis"], json!({ "kind": "double" })).await;
    let id = s["id"].as_str().unwrap();

    let first = next(&h.app, id, "ana").await;
    assert_eq!(first["status"], "item");
    let item = &first["item"];
    assert_eq!(item["item_id"], "t0:0");
    assert_eq!(item["focus_index"], 0);
    assert_eq!(item["matches"], json!(["tarea"]));
    assert_eq!(item["context"].as_array().unwrap().len(), 3);
    assert_eq!(item["lease"]["coder"], "ana");

    // Luis has his own copy of the same item.
    let other = next(&h.app, id, "luis").await;
    assert_eq!(other["item"]["item_id"], "t0:0");

    // Ana's next request moves past her leased item.
    let second = next(&h.app, id, "ana").await;
    assert_eq!(second["item"]["item_id"], "t0:2");

    // After expiry the first item is offered again.
    h.clock.advance(60_001);
    let again = next(&h.app, id, "ana").await;
    assert_eq!(again["item"]["item_id"], "t0:0");

    let (status, body) = call(&h.app, "GET", &format!("/sessions/{id}/next?coder=eve"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&body, "UnknownCoder");
    let (status, body) = call(&h.app, "GET", &format!("/sessions/{id}/next"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&body, "BadRequest");
}

#[tokio::test]
async fn submissions() {
    let h = harness();
    upload(&h.app).await;
    let (_, s) = session(&h.app, &["ana"], json!({ "kind": "single" })).await;
    let id = s["id"].as_str().unwrap();

    let (status, body) = submit(&h.app, id, "ana", "t0:0", message("loss", "extrinsic")).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error(&body, "LeaseLost");

    next(&h.app, id, "ana").await;
    let (status, body) = call(
        &h.app,
        "POST",
        &format!("/sessions/{id}/annotations"),
        Some(json!({ "coder": "ana", "item_id": "t0:0", "decision": message("gain", "identified"), "span": { "start": 7, "end": 3 } })),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&body, "ValidationFailed");
    assert_eq!(body["details"]["violations"][0]["code"], "invalid_span");

    let (status, body) = submit(&h.app, id, "ana", "t0:0", json!({ "kind": "message" })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["details"]["violations"][0]["code"], "missing_category");

    let (status, ack) = submit(&h.app, id, "ana", "t0:0", message("loss", "extrinsic")).await;
    assert_eq!(status, StatusCode::CREATED, "{ack}");
    assert_eq!(ack["replayed"], false);
    let annotation_id = ack["annotation_id"].clone();

    let (status, replay) = submit(&h.app, id, "ana", "t0:0", message("loss", "extrinsic")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(replay["annotation_id"], annotation_id);
    assert_eq!(replay["replayed"], true);

    let (status, body) = submit(&h.app, id, "ana", "t0:0", message("gain", "extrinsic")).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error(&body, "DuplicateSubmission");
    assert_eq!(body["details"]["annotation_id"], annotation_id);

    let (status, body) = submit(&h.app, id, "ana", "t9:0", message("gain", "extrinsic")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&body, "UnknownItem");

    // A lease that ran out must be renewed before submitting.
    next(&h.app, id, "ana").await;
    h.clock.advance(60_001);
    let (status, body) = submit(&h.app, id, "ana", "t0:2", json!({ "kind": "not_a_message" })).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error(&body, "LeaseLost");

    // Span adjustments may reach past the focus segment.
    let n = next(&h.app, id, "ana").await;
    assert_eq!(n["item"]["item_id"], "t0:2");
    let (status, _) = call(
        &h.app,
        "POST",
        &format!("/sessions/{id}/annotations"),
        Some(json!({ "coder": "ana", "item_id": "t0:2", "decision": message("gain", "intrinsic"), "span": { "start": 1, "end": 4 }, "note": "runs on" })),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);

    let (_, export) = call(&h.app, "GET", &format!("/sessions/{id}/export"), None).await;
    let anns = export["annotations"].as_array().unwrap();
    assert_eq!(anns.len(), 2);
    assert_eq!(anns[1]["span"], json!({ "start": 1, "end": 4 }));
    assert_eq!(anns[1]["note"], "runs on");
}

#[tokio::test]
async fn progress_counts() {
    let h = harness();
    upload(&h.app).await;
    let (_, s) = session(&h.app, &["ana", "luis"], json!({ "kind": "single" })).await;
    let id = s["id"].as_str().unwrap();
    let (status, p) = call(&h.app, "GET", &format!("/sessions/{id}/progress"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(p["items_total"], 120);
    assert_eq!(p["per_coder"]["ana"], json!({ "assigned": 60, "completed": 0, "leased": 0 }));
    assert!(p["agreement"].is_null());

    let n = next(&h.app, id, "ana").await;
    let (_, p) = call(&h.app, "GET", &format!("/sessions/{id}/progress"), None).await;
    assert_eq!(p["per_coder"]["ana"]["leased"], 1);
    submit(&h.app, id, "ana", n["item"]["item_id"].as_str().unwrap(), message("gain", "extrinsic")).await;
    let (_, p) = call(&h.app, "GET", &format!("/sessions/{id}/progress"), None).await;
    assert_eq!(p["per_coder"]["ana"], json!({ "assigned": 60, "completed": 1, "leased": 0 }));
    assert_eq!(p["per_coder"]["luis"]["completed"], 0);
}

async fn code_all(app: &Router, id: &str, coder: &str, limit: usize, decide: impl Fn(usize) -> Value) {
    for k in 0..limit {
        let n = next(app, id, coder).await;
        if n["status"] == "done" {
            break;
        }
        let item = n["item"]["item_id"].as_str().unwrap();
        let (status, body) = submit(app, id, coder, item, decide(k)).await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
    }
}

fn set_of(export: &Value) -> AnnotationSet {
    AnnotationSet {
        corpus_id: export["corpus_id"].as_str().unwrap().into(),
        annotations: serde_json::from_value::<Vec<MessageAnnotation>>(export["annotations"].clone()).unwrap(),
    }
}

#[tokio::test]
async fn agreement_endpoints() {
    let h = harness();
    upload(&h.app).await;
    let (_, single) = session(&h.app, &["ana"], json!({ "kind": "single" })).await;
    let (status, body) = call(&h.app, "GET", &format!("/sessions/{}/agreement", single["id"].as_str().unwrap()), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error(&body, "NotDoubleCoded");

    let (_, s) = session(&h.app, &["ana", "luis"], json!({ "kind": "double" })).await;
    let id = s["id"].as_str().unwrap();
    let (status, body) = call(&h.app, "GET", &format!("/sessions/{id}/agreement"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error(&body, "NoUnits");

    code_all(&h.app, id, "ana", 10, |_| message("gain", "identified")).await;
    code_all(&h.app, id, "luis", 10, |_| message("gain", "identified")).await;
    let (status, body) = call(&h.app, "GET", &format!("/sessions/{id}/agreement"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["report"]["overall_percent"], 100.0);
    assert_eq!(body["shared_items"], 10);

    let (_, s) = session(&h.app, &["ana", "luis"], json!({ "kind": "double" })).await;
    let id = s["id"].as_str().unwrap();
    code_all(&h.app, id, "ana", 100, |_| message("loss", "introjected")).await;
    code_all(&h.app, id, "luis", 100, |k| {
        if k == 41 {
            message("gain", "introjected")
        } else {
            message("loss", "introjected")
        }
    })
    .await;
    let (_, body) = call(&h.app, "GET", &format!("/sessions/{id}/agreement"), None).await;
    assert_eq!(body["report"]["overall_percent"], 99.0);
    let (_, progress) = call(&h.app, "GET", &format!("/sessions/{id}/progress"), None).await;
    assert_eq!(progress["agreement"], 99.0);

    // Same number from the reliability module on the exported sets.
    let (_, a) = call(&h.app, "GET", &format!("/sessions/{id}/export?coder=ana"), None).await;
    let (_, b) = call(&h.app, "GET", &format!("/sessions/{id}/export?coder=luis"), None).await;
    let pairs = align_annotations(&set_of(&a), &set_of(&b), DEFAULT_OVERLAP_THRESHOLD).unwrap();
    assert_eq!(percent_agreement::<f64>(&pairs).unwrap(), body["report"]["overall_percent"].as_f64().unwrap());
}

#[tokio::test]
async fn partial_reliability_slice() {
    let h = harness();
    upload(&h.app).await;
    let (_, s) = session(&h.app, &["ana", "luis", "eva"], json!({ "kind": "double", "reliability_percent": 25 })).await;
    let sizes = &s["queue_sizes"];
    // 30 double-coded items go to ana and luis; 90 more are dealt over all three.
    assert_eq!(sizes["ana"], 60);
    assert_eq!(sizes["luis"], 60);
    assert_eq!(sizes["eva"], 30);
    let (status, body) = session(&h.app, &["ana", "luis"], json!({ "kind": "double", "reliability_percent": 0 })).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&body, "InvalidPercent");
}

#[tokio::test]
async fn export_formats_close_and_adjudicate() {
    let h = harness();
    upload(&h.app).await;
    let (_, s) = session(&h.app, &["ana", "luis"], json!({ "kind": "double" })).await;
    let id = s["id"].as_str().unwrap();
    code_all(&h.app, id, "ana", 3, |_| message("gain", "extrinsic")).await;
    code_all(&h.app, id, "luis", 4, |_| json!({ "kind": "not_a_message" })).await;

    let (status, csv) = call_raw(&h.app, "GET", &format!("/sessions/{id}/export?format=csv"), None, None).await;
    assert_eq!(status, StatusCode::OK);
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("annotation_id,coder_id,transcript_id,start,end,frame,appeal,decision,note\n"));
    assert_eq!(text.lines().count(), 8);
    let (status, body) = call(&h.app, "GET", &format!("/sessions/{id}/export?format=xml"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&body, "BadRequest");

    let (status, body) = call(&h.app, "GET", &format!("/sessions/{id}/adjudicated"), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&body, "BadRequest");

    let (status, merged) = call(
        &h.app,
        "POST",
        &format!("/sessions/{id}/adjudicate"),
        Some(json!({ "overrides": [{ "item_id": "t0:2", "decision": message("loss", "identified") }] })),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{merged}");
    let anns = merged["annotations"].as_array().unwrap();
    // Items 0..3 from ana (one overridden) and item 3 from luis.
    assert_eq!(anns.len(), 4);
    assert_eq!(anns[0]["coder_id"], "ana");
    assert_eq!(anns[1]["coder_id"], "adjudicator");
    assert_eq!(anns[1]["appeal"], Value::Null);
    assert_eq!(anns[1]["decision"]["appeal"], "identified");
    assert_eq!(anns[3]["coder_id"], "luis");
    let (_, stored) = call(&h.app, "GET", &format!("/sessions/{id}/adjudicated"), None).await;
    assert_eq!(stored["annotations"], merged["annotations"]);

    let (status, closed) = call(&h.app, "POST", &format!("/sessions/{id}/close"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(closed["status"], "closed");
    let (status, body) = call(&h.app, "GET", &format!("/sessions/{id}/next?coder=ana"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_error(&body, "SessionClosed");
    let (_, p1) = call(&h.app, "GET", &format!("/sessions/{id}/progress"), None).await;
    let (_, p2) = call(&h.app, "GET", &format!("/sessions/{id}/progress"), None).await;
    assert_eq!(p1, p2);
    assert_eq!(p1["status"], "closed");
}

#[tokio::test]
async fn shared_token() {
    let dir = tempfile::tempdir().unwrap();
    let app = harness_in(dir.path(), ManualClock::new(0), Some("sesame"));
    let (status, body) = call_raw(&app, "GET", "/corpora/c1", None, None).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
    assert_error(&serde_json::from_slice(&body).unwrap(), "Unauthorized");
    let (status, _) = call_raw(&app, "GET", "/corpora/c1", None, Some("wrong")).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
    let (status, _) = call_raw(&app, "GET", "/corpora/c1", None, Some("sesame")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call_raw(&app, "GET", "/health", None, None).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn static_ui_mount() {
    let dir = tempfile::tempdir().unwrap();
    let ui = tempfile::tempdir().unwrap();
    std::fs::write(ui.path().join("index.html"), "<h1>coder</h1>").unwrap();
    let service = CodingService::open(dir.path(), Arc::new(ManualClock::new(0)), 1000, 0).unwrap();
    let app = router(app_state(service, None), Some(ui.path().to_path_buf()));
    let (status, body) = call_raw(&app, "GET", "/ui/index.html", None, None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"<h1>coder</h1>");
}

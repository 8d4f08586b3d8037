//! The HTTP API the editor consumes, driven in-process.

mod common;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use common::{options, replay, FOX_REQUEST, MOVIES_REQUEST};
use factflow::sheet::server::{router, AppState, JobStatus};
use factflow::sheet::{FactSheet, Workspace};
use http_body_util::BodyExt;
use serde_json::{json, Value as Json};
use std::sync::Arc;
use std::time::Duration;
use tempfile::TempDir;
use tower::ServiceExt;

fn app() -> (TempDir, Router) {
    let dir = tempfile::tempdir().unwrap();
    let ws = Arc::new(Workspace::open(dir.path()).unwrap());
    (dir, router(AppState::new(ws, Arc::new(replay()), options())))
}

async fn send(app: &Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Vec<u8>) {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

async fn send_json(app: &Router, method: &str, uri: &str, body: Json) -> (StatusCode, Json) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let (status, bytes) = send(app, req).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Json::Null))
}

fn multipart(csv: &str, name: &str) -> Request<Body> {
    let boundary = "factflowboundary";
    let body = format!(
        "--{boundary}\r\nContent-Disposition: form-data; name=\"name\"\r\n\r\n{name}\r\n\
         --{boundary}\r\nContent-Disposition: form-data; name=\"file\"; filename=\"data.csv\"\r\n\
         Content-Type: text/csv\r\n\r\n{csv}\r\n--{boundary}--\r\n"
    );
    Request::post("/datasets")
        .header(header::CONTENT_TYPE, format!("multipart/form-data; boundary={boundary}"))
        .body(Body::from(body))
        .unwrap()
}

/// Starts a sheet and polls its status until the job finishes.
async fn create_sheet(app: &Router, body: Json) -> (String, JobStatus) {
    let (status, created) = send_json(app, "POST", "/sheets", body).await;
    assert_eq!(status, StatusCode::ACCEPTED, "{created}");
    let id = created["sheet_id"].as_str().unwrap().to_string();
    for _ in 0..500 {
        let (status, bytes) = get(app, &format!("/sheets/{id}/status")).await;
        assert_eq!(status, StatusCode::OK);
        let job: JobStatus = serde_json::from_slice(&bytes).unwrap();
        if job.done {
            return (id, job);
        }
        tokio::time::sleep(Duration::from_millis(20)).await;
    }
    panic!("sheet {id} did not finish");
}

#[tokio::test]
async fn health_is_ok() {
    let (_dir, app) = app();
    assert_eq!(get(&app, "/health").await, (StatusCode::OK, b"ok".to_vec()));
}

#[tokio::test]
async fn upload_returns_the_classified_schema() {
    let (_dir, app) = app();
    let (status, bytes) = send(&app, multipart("City,Visits\nLyon,3\nNice,5\nLyon,4\n", "trips")).await;
    assert_eq!(status, StatusCode::CREATED);
    let body: Json = serde_json::from_slice(&bytes).unwrap();
    assert!(body["dataset_id"].as_str().is_some_and(|s| !s.is_empty()));
    let schema = body["schema"].to_string();
    assert!(schema.contains("City") && schema.contains("Visits"), "{schema}");

    let (status, bytes) = send(&app, multipart("a,b\n1,2,3\n", "bad")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let err: Json = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(err["kind"], "invalid_dataset");
}

#[tokio::test]
async fn full_editor_round_trip() {
    let (_dir, app) = app();
    let (id, job) = create_sheet(&app, json!({"dataset_id": "movies", "request": MOVIES_REQUEST, "seed": 7})).await;
    assert!(job.error.is_none(), "{:?}", job.error);

    let (status, bytes) = get(&app, &format!("/sheets/{id}")).await;
    assert_eq!(status, StatusCode::OK);
    let sheet: FactSheet = serde_json::from_slice(&bytes).unwrap();
    assert!(sheet.check().is_empty());

    // chart blocks are served by hash
    let block = &sheet.facts.values().next().unwrap().chart_block;
    let (status, svg) = get(&app, &format!("/{block}")).await;
    assert_eq!(status, StatusCode::OK);
    assert!(svg.starts_with(b"<svg"));

    // natural-language add before any edit, as recorded
    let (status, body) = send_json(&app, "POST", &format!("/sheets/{id}/facts"), json!({"request": FOX_REQUEST})).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let added: FactSheet = serde_json::from_value(body).unwrap();
    assert_eq!(added.facts.len(), sheet.facts.len() + 1);

    let ops = json!([{"op": "edit_text", "field": "sheet_title", "text": "Movies in brief"}]);
    let (status, body) = send_json(&app, "PATCH", &format!("/sheets/{id}"), json!({"revision": added.revision, "ops": ops})).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["structure"]["title"], "Movies in brief");
    assert_eq!(body["revision"], added.revision + 1);

    // the same revision again is stale
    let (status, body) = send_json(&app, "PATCH", &format!("/sheets/{id}"), json!({"revision": added.revision, "ops": ops})).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["kind"], "conflict");

    let (status, svg) = get(&app, &format!("/sheets/{id}/export?format=svg")).await;
    assert_eq!(status, StatusCode::OK);
    assert!(String::from_utf8(svg).unwrap().contains("Movies in brief"));
    let (status, pdf) = get(&app, &format!("/sheets/{id}/export?format=pdf")).await;
    assert_eq!(status, StatusCode::OK);
    assert!(pdf.starts_with(b"%PDF-"));
    let (status, _) = get(&app, &format!("/sheets/{id}/export?format=png")).await;
    assert!(status.is_client_error());
}

#[tokio::test]
async fn failures_map_to_status_codes() {
    let (_dir, app) = app();
    for uri in ["/sheets/not-a-uuid", "/sheets/4f8e1ab6-5b5c-4f60-9a5f-6f4f8f0e2d11", "/blocks/0000"] {
        let (status, _) = get(&app, uri).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
    }
    let (status, body) = send_json(&app, "POST", "/sheets", json!({"dataset_id": "nothing-here"})).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["kind"], "not_found");
    let forecast = json!({"dataset_id": "carsales", "request": "Forecast next year's car sales"});
    let (status, body) = send_json(&app, "POST", "/sheets", forecast).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["kind"], "unsupported_capability");
}

#[tokio::test]
async fn failed_jobs_report_their_error() {
    let dir = tempfile::tempdir().unwrap();
    let empty = tempfile::tempdir().unwrap();
    let ws = Arc::new(Workspace::open(dir.path()).unwrap());
    let transport = Arc::new(factflow::agent::ReplayTransport::new(empty.path()));
    let app = router(AppState::new(ws, transport, options()));
    let (_, job) = create_sheet(&app, json!({"dataset_id": "carsales"})).await;
    let err = job.error.expect("job failed");
    assert_eq!(err.kind, "fixture_missing");
    assert_eq!(err.digest.map(|d| d.len()), Some(64));
}

//! HTTP API over a workspace. Worker calls block, so every handler that
//! touches the chain or the disk runs on the blocking pool.

use super::export::{export, ExportFormat};
use super::pipeline::generate_sheet_with_id;
use super::{add_fact_nl, EditOp, GenerateOptions, SheetError, Stage, Workspace};
use crate::agent::{BlockError, LlmTransport};
use crate::ingest::ClassOverrides;
use crate::workers::WorkerError;
use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use uuid::Uuid;

const MAX_UPLOAD_BYTES: usize = 32 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobStatus {
    pub sheet_id: Uuid,
    pub stage: Stage,
    pub done: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ApiError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub kind: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
}

pub struct AppState {
    pub workspace: Arc<Workspace>,
    pub transport: Arc<dyn LlmTransport>,
    pub options: GenerateOptions,
    jobs: Mutex<HashMap<Uuid, JobStatus>>,
}

impl AppState {
    pub fn new(workspace: Arc<Workspace>, transport: Arc<dyn LlmTransport>, options: GenerateOptions) -> Arc<Self> {
        Arc::new(AppState {
            workspace,
            transport,
            options,
            jobs: Mutex::new(HashMap::new()),
        })
    }

    fn set_job(&self, status: JobStatus) {
        self.jobs.lock().unwrap().insert(status.sheet_id, status);
    }
}

/// HTTP status and stable kind string for an error.
pub fn classify_error(e: &SheetError) -> (StatusCode, &'static str) {
    use StatusCode as S;
    match e {
        SheetError::NotFound { .. } => (S::NOT_FOUND, "not_found"),
        SheetError::Validation(_) => (S::UNPROCESSABLE_ENTITY, "validation"),
        SheetError::Conflict { .. } => (S::CONFLICT, "conflict"),
        SheetError::NoUsableFacts { .. } => (S::UNPROCESSABLE_ENTITY, "no_usable_facts"),
        SheetError::Ingest(_) | SheetError::Represent(_) | SheetError::Anonymize(_) => {
            (S::BAD_REQUEST, "invalid_dataset")
        }
        SheetError::Worker(w) => match w {
            _ if w.fixture_missing().is_some() => (S::BAD_GATEWAY, "fixture_missing"),
            WorkerError::Agent(_) => (S::BAD_GATEWAY, "llm_error"),
            WorkerError::UnsupportedCapability(_) => (S::UNPROCESSABLE_ENTITY, "unsupported_capability"),
            WorkerError::InvalidRequest(_) => (S::BAD_REQUEST, "invalid_request"),
            WorkerError::Extraction(_) => (S::UNPROCESSABLE_ENTITY, "extraction_failed"),
            WorkerError::NoFacts { .. } => (S::UNPROCESSABLE_ENTITY, "no_facts"),
            WorkerError::TooFewColumns { .. } => (S::UNPROCESSABLE_ENTITY, "chart_failed"),
        },
        SheetError::Block(BlockError::NotFound(_)) => (S::NOT_FOUND, "not_found"),
        SheetError::Block(BlockError::InvalidPath(_)) => (S::NOT_FOUND, "not_found"),
        SheetError::Layout(_) | SheetError::Block(_) | SheetError::Render(_) | SheetError::Io(_) => {
            (S::INTERNAL_SERVER_ERROR, "internal")
        }
    }
}

pub fn api_error(e: &SheetError) -> ApiError {
    ApiError {
        kind: classify_error(e).1.into(),
        message: e.to_string(),
        digest: e.fixture_missing().map(str::to_string),
    }
}

struct Failure(SheetError);

impl From<SheetError> for Failure {
    fn from(e: SheetError) -> Self {
        Failure(e)
    }
}

impl IntoResponse for Failure {
    fn into_response(self) -> Response {
        let (status, _) = classify_error(&self.0);
        (status, Json(api_error(&self.0))).into_response()
    }
}

type ApiResult<T> = Result<T, Failure>;

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, SheetError> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| SheetError::Io(format!("worker task failed: {e}")))?
        .map_err(Failure)
}

fn sheet_id(raw: &str) -> Result<Uuid, SheetError> {
    Uuid::parse_str(raw).map_err(|_| SheetError::NotFound {
        kind: "sheet",
        id: raw.to_string(),
    })
}

async fn health() -> &'static str {
    "ok"
}

async fn upload_dataset(State(st): State<Arc<AppState>>, mut form: Multipart) -> ApiResult<Response> {
    let mut file: Option<(String, Vec<u8>)> = None;
    let mut name: Option<String> = None;
    let mut overrides: Option<ClassOverrides> = None;
    let bad = |m: String| Failure(SheetError::Validation(m));
    while let Some(field) = form.next_field().await.map_err(|e| bad(e.to_string()))? {
        match field.name().unwrap_or_default() {
            "file" => {
                let fname = field.file_name().unwrap_or("dataset.csv").to_string();
                let bytes = field.bytes().await.map_err(|e| bad(e.to_string()))?;
                file = Some((fname, bytes.to_vec()));
            }
            "name" => name = Some(field.text().await.map_err(|e| bad(e.to_string()))?),
            "overrides" => {
                let text = field.text().await.map_err(|e| bad(e.to_string()))?;
                overrides = Some(serde_json::from_str(&text).map_err(|e| bad(format!("overrides: {e}")))?);
            }
            _ => {}
        }
    }
    let (fname, bytes) = file.ok_or_else(|| bad("multipart field \"file\" is required".into()))?;
    let name = name
        .filter(|n| !n.trim().is_empty())
        .unwrap_or_else(|| fname.trim_end_matches(".csv").to_string());
    let ws = st.workspace.clone();
    let stored = blocking(move || ws.ingest_csv(&bytes, &name, overrides.as_ref())).await?;
    Ok((
        StatusCode::CREATED,
        Json(json!({"dataset_id": stored.id, "schema": stored.dataset.schema()})),
    )
        .into_response())
}

#[derive(Debug, Deserialize)]
struct CreateSheet {
    dataset_id: String,
    #[serde(default)]
    request: Option<String>,
    #[serde(default)]
    seed: Option<u64>,
}

async fn create_sheet(State(st): State<Arc<AppState>>, Json(body): Json<CreateSheet>) -> ApiResult<Response> {
    // fail fast on an unknown dataset or an unsupported request
    let ws = st.workspace.clone();
    let dataset_id = body.dataset_id.clone();
    blocking(move || ws.load_dataset(&dataset_id).map(|_| ())).await?;
    if let Some(r) = &body.request {
        crate::workers::check_supported(r).map_err(SheetError::from)?;
    }
    let id = Uuid::new_v4();
    st.set_job(JobStatus {
        sheet_id: id,
        stage: Stage::Queued,
        done: false,
        error: None,
    });
    let job = st.clone();
    tokio::task::spawn_blocking(move || {
        let mut opts = job.options;
        if let Some(seed) = body.seed {
            opts.seed = seed;
        }
        let progress = |stage: Stage| {
            job.set_job(JobStatus {
                sheet_id: id,
                stage,
                done: stage == Stage::Done,
                error: None,
            })
        };
        let result = generate_sheet_with_id(
            &job.workspace,
            id,
            &body.dataset_id,
            body.request.as_deref(),
            &opts,
            job.transport.as_ref(),
            &progress,
        );
        if let Err(e) = result {
            job.set_job(JobStatus {
                sheet_id: id,
                stage: Stage::Failed,
                done: true,
                error: Some(api_error(&e)),
            });
        }
    });
    Ok((StatusCode::ACCEPTED, Json(json!({"sheet_id": id}))).into_response())
}

async fn sheet_status(State(st): State<Arc<AppState>>, Path(raw): Path<String>) -> ApiResult<Json<JobStatus>> {
    let id = sheet_id(&raw)?;
    if let Some(s) = st.jobs.lock().unwrap().get(&id) {
        return Ok(Json(s.clone()));
    }
    let ws = st.workspace.clone();
    blocking(move || ws.load_sheet(id)).await?;
    Ok(Json(JobStatus {
        sheet_id: id,
        stage: Stage::Done,
        done: true,
        error: None,
    }))
}

async fn get_sheet(State(st): State<Arc<AppState>>, Path(raw): Path<String>) -> ApiResult<Response> {
    let id = sheet_id(&raw)?;
    let ws = st.workspace.clone();
    let sheet = blocking(move || ws.load_sheet(id)).await?;
    Ok(Json(sheet).into_response())
}

#[derive(Debug, Deserialize)]
struct PatchSheet {
    revision: u64,
    ops: Vec<EditOp>,
}

async fn patch_sheet(
    State(st): State<Arc<AppState>>,
    Path(raw): Path<String>,
    Json(body): Json<PatchSheet>,
) -> ApiResult<Response> {
    let id = sheet_id(&raw)?;
    let ws = st.workspace.clone();
    let sheet = blocking(move || ws.apply_edit(id, Some(body.revision), &body.ops)).await?;
    Ok(Json(sheet).into_response())
}

#[derive(Debug, Deserialize)]
struct AddFact {
    request: String,
}

async fn add_fact(
    State(st): State<Arc<AppState>>,
    Path(raw): Path<String>,
    Json(body): Json<AddFact>,
) -> ApiResult<Response> {
    let id = sheet_id(&raw)?;
    let job = st.clone();
    let sheet = blocking(move || add_fact_nl(&job.workspace, id, &body.request, job.transport.as_ref())).await?;
    Ok(Json(sheet).into_response())
}

#[derive(Debug, Deserialize)]
struct ExportQuery {
    #[serde(default)]
    format: Option<String>,
}

async fn export_sheet(
    State(st): State<Arc<AppState>>,
    Path(raw): Path<String>,
    Query(q): Query<ExportQuery>,
) -> ApiResult<Response> {
    let id = sheet_id(&raw)?;
    let format: ExportFormat = q.format.as_deref().unwrap_or("svg").parse()?;
    let ws = st.workspace.clone();
    let bytes = blocking(move || export(&ws.load_sheet(id)?, format)).await?;
    Ok(([(header::CONTENT_TYPE, format.content_type())], bytes).into_response())
}

async fn get_block(State(st): State<Arc<AppState>>, Path(hash): Path<String>) -> ApiResult<Response> {
    let ws = st.workspace.clone();
    let bytes = blocking(move || Ok(ws.blocks().get(&format!("blocks/{hash}"))?)).await?;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], bytes).into_response())
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/datasets", post(upload_dataset))
        .route("/sheets", post(create_sheet))
        .route("/sheets/{id}", get(get_sheet).patch(patch_sheet))
        .route("/sheets/{id}/status", get(sheet_status))
        .route("/sheets/{id}/facts", post(add_fact))
        .route("/sheets/{id}/export", get(export_sheet))
        .route("/blocks/{hash}", get(get_block))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(state)
}

pub async fn serve(addr: std::net::SocketAddr, state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(state)).await
}

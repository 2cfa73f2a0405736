//! JSON endpoints over the dispatcher and the annotation log.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::{mpsc, oneshot};
use tower_http::services::ServeDir;

use super::catalog::{Catalog, ObjectPayload};
use super::clock::Clock;
use super::dispatch::{Dispatcher, Lease, NextOutcome};
use crate::config::ServiceSection;
use crate::error::{Error, Result};
use crate::io::{AnnotationLog, AnnotationRecord, AnnotationStats, Decision};

type WriteRequest = (AnnotationRecord, oneshot::Sender<Result<()>>);

/// Shared handle to a running service. Cloning is cheap.
#[derive(Clone)]
pub struct Service {
    catalog: Arc<Catalog>,
    dispatch: Arc<Mutex<Dispatcher>>,
    writer: mpsc::Sender<WriteRequest>,
    clock: Arc<dyn Clock>,
    cfg: ServiceSection,
}

impl Service {
    /// Replays the log at `log_path` (repairing a torn final line) and
    /// starts the writer task. Must be called inside a tokio runtime.
    pub fn start(catalog: Catalog, log_path: &Path, clock: Arc<dyn Clock>, cfg: ServiceSection) -> Result<Self> {
        let (mut log, contents) = AnnotationLog::open(log_path)?;
        tracing::info!(
            records = contents.records.len(),
            objects = catalog.len(),
            "annotation log replayed"
        );
        let dispatch = Dispatcher::new(catalog.ids(), contents.records, cfg.lease_seconds * 1000);
        let (tx, mut rx) = mpsc::channel::<WriteRequest>(64);
        tokio::spawn(async move {
            while let Some((record, done)) = rx.recv().await {
                let _ = done.send(log.append(&record));
            }
        });
        Ok(Service {
            catalog: Arc::new(catalog),
            dispatch: Arc::new(Mutex::new(dispatch)),
            writer: tx,
            clock,
            cfg,
        })
    }

    pub fn router(&self, ui_dir: Option<&Path>) -> Router {
        let api = Router::new()
            .route("/api/next", get(next))
            .route("/api/object/{id}", get(object))
            .route("/api/submit", post(submit))
            .route("/api/stats", get(stats))
            .route("/healthz", get(|| async { "ok" }))
            .with_state(self.clone());
        match ui_dir {
            Some(dir) => api.fallback_service(ServeDir::new(PathBuf::from(dir))),
            None => api,
        }
    }

    pub fn stats(&self) -> ServiceStats {
        let now = self.clock.now_ms();
        let d = self.dispatch.lock().expect("dispatch lock");
        ServiceStats {
            objects: d.total(),
            completed: d.completed(),
            leased: d.live_leases(now),
            issued: d.issued(),
            annotations: AnnotationStats::from_records(d.records()),
        }
    }

    pub fn next(&self, annotator_id: &str) -> NextOutcome {
        let now = self.clock.now_ms();
        self.dispatch.lock().expect("dispatch lock").next(annotator_id, now)
    }

    /// Validates the decision and the lease, persists the record, then
    /// releases the lease.
    pub async fn submit(&self, req: SubmitRequest) -> Result<AnnotationRecord> {
        let object = self
            .catalog
            .get(&req.object_id)
            .ok_or_else(|| Error::InvalidInput(format!("unknown object `{}`", req.object_id)))?;
        let decision = Decision::parse(&req.decision, req.reason.as_deref())?;
        let now = self.clock.now_ms();
        self.dispatch
            .lock()
            .expect("dispatch lock")
            .begin_submit(&req.annotator_id, &req.object_id, now)?;
        let record = AnnotationRecord {
            object_id: req.object_id.clone(),
            decision,
            annotator_id: req.annotator_id,
            elapsed_ms: req.elapsed_ms,
            timestamp: now,
            candidate_set_hash: object.record.hash.clone(),
        };
        let (tx, rx) = oneshot::channel();
        let written = match self.writer.send((record.clone(), tx)).await {
            Ok(()) => rx
                .await
                .unwrap_or_else(|_| Err(Error::InvalidInput("annotation writer stopped".into()))),
            Err(_) => Err(Error::InvalidInput("annotation writer stopped".into())),
        };
        let mut d = self.dispatch.lock().expect("dispatch lock");
        match written {
            Ok(()) => {
                d.complete(record.clone());
                Ok(record)
            }
            Err(e) => {
                d.abort(&record.object_id);
                Err(e)
            }
        }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }
}

/// Binds `addr` and serves until the future is dropped.
pub async fn serve(router: Router, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router).await
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubmitRequest {
    pub annotator_id: String,
    pub object_id: String,
    /// A candidate tag (`HS`, `HG`, ...) or `discard`.
    pub decision: String,
    #[serde(default)]
    pub reason: Option<String>,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ServiceStats {
    pub objects: usize,
    pub completed: usize,
    pub leased: usize,
    pub issued: u64,
    #[serde(flatten)]
    pub annotations: AnnotationStats,
}

#[derive(Debug, Serialize)]
struct WorkItem {
    #[serde(flatten)]
    payload: ObjectPayload,
    lease: Lease,
}

#[derive(Deserialize)]
struct NextQuery {
    annotator: Option<String>,
}

struct ApiError(StatusCode, &'static str, String);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        match e {
            Error::StaleLease { .. } => ApiError(StatusCode::CONFLICT, "stale-lease", e.to_string()),
            Error::InvalidDecision(_) => ApiError(StatusCode::BAD_REQUEST, "invalid-decision", e.to_string()),
            Error::InvalidInput(ref m) if m.starts_with("unknown object") => {
                ApiError(StatusCode::NOT_FOUND, "unknown-object", e.to_string())
            }
            _ => ApiError(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(json!({ "error": self.1, "message": self.2 }))).into_response()
    }
}

async fn next(State(s): State<Service>, Query(q): Query<NextQuery>) -> Result<Response, ApiError> {
    let annotator = q
        .annotator
        .filter(|a| !a.trim().is_empty())
        .ok_or_else(|| ApiError(StatusCode::BAD_REQUEST, "missing-annotator", "annotator is required".into()))?;
    match s.next(&annotator) {
        NextOutcome::Leased { object_id, lease } => {
            let payload = s.catalog.payload(&object_id).expect("dispatched ids come from the catalog");
            Ok(Json(json!({ "status": "leased", "item": WorkItem { payload, lease } })).into_response())
        }
        NextOutcome::NoneRemaining { retry_after_ms } => {
            let retry_s = retry_after_ms.map(|ms| ms.div_ceil(1000).max(1));
            let mut resp = Json(json!({
                "status": "none-remaining",
                "complete": retry_after_ms.is_none(),
                "retry_after_s": retry_s.unwrap_or(s.cfg.retry_after_seconds),
            }))
            .into_response();
            if let Some(secs) = retry_s {
                resp.headers_mut().insert(header::RETRY_AFTER, HeaderValue::from(secs));
            }
            Ok(resp)
        }
    }
}

async fn object(State(s): State<Service>, UrlPath(id): UrlPath<String>) -> Result<Response, ApiError> {
    let payload = s
        .catalog
        .payload(&id)
        .ok_or_else(|| ApiError(StatusCode::NOT_FOUND, "unknown-object", format!("unknown object `{id}`")))?;
    let lease = s
        .dispatch
        .lock()
        .expect("dispatch lock")
        .lease(&id, s.clock.now_ms())
        .cloned();
    Ok(Json(json!({ "item": payload, "lease": lease })).into_response())
}

async fn submit(State(s): State<Service>, Json(req): Json<SubmitRequest>) -> Result<Response, ApiError> {
    let record = s.submit(req).await?;
    Ok(Json(json!({ "status": "ok", "record": record })).into_response())
}

async fn stats(State(s): State<Service>) -> Json<ServiceStats> {
    Json(s.stats())
}

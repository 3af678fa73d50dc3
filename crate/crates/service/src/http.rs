use std::convert::Infallible;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::IntoResponse;
use axum::routing::{get, post, put};
use axum::{Json, Router};
use futures::stream::{self, Stream, StreamExt};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use story_core::graph::GraphDocument;
use story_core::{Dimension, DimensionSpec, LevelConstraints, NarrativeGraph, Snapshot};
use tokio::sync::watch;
use tokio::time::Instant;

use crate::docs::{CreateSession, DimensionsBody, EliteView, SessionInfo, Status, TargetAck};
use crate::error::ServiceError;
use crate::manager::SessionManager;
use crate::session::Session;

type AppState = Arc<SessionManager>;
type Reply<T> = Result<Json<T>, ServiceError>;

pub fn router(manager: Arc<SessionManager>) -> Router {
    Router::new()
        .route("/sessions", post(create).get(list))
        .route("/sessions/{id}", get(info).delete(remove))
        .route("/sessions/{id}/target", get(target).put(update_target))
        .route("/sessions/{id}/grid", get(grid))
        .route("/sessions/{id}/stream", get(stream_grid))
        .route("/sessions/{id}/cells/{i}/{j}", get(elite))
        .route("/sessions/{id}/cells/{i}/{j}/adopt", post(adopt))
        .route("/sessions/{id}/dimensions", put(set_dimensions))
        .route("/sessions/{id}/constraints", put(set_constraints))
        .route("/sessions/{id}/pause", post(pause))
        .route("/sessions/{id}/resume", post(resume))
        .with_state(manager)
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ServiceError> {
    serde_json::from_slice(body).map_err(|e| ServiceError::InvalidDocument(e.to_string()))
}

fn graph_from(doc: GraphDocument) -> Result<NarrativeGraph, ServiceError> {
    NarrativeGraph::try_from(doc).map_err(|e| ServiceError::InvalidDocument(format!("integrity error: {e}")))
}

fn dims_from(body: DimensionsBody) -> Result<DimensionSpec, ServiceError> {
    DimensionSpec::from_ids(&body.selected, body.granularity).map_err(|e| ServiceError::InvalidRequest(e.to_string()))
}

/// Optional `x`/`y` dimension ids selecting a projection.
#[derive(Debug, Default, Deserialize)]
struct ProjectionQuery {
    x: Option<String>,
    y: Option<String>,
}

impl ProjectionQuery {
    fn resolve(&self) -> Result<Option<[Dimension; 2]>, ServiceError> {
        let dim = |s: &str| s.parse::<Dimension>().map_err(|e| ServiceError::InvalidRequest(e.to_string()));
        match (&self.x, &self.y) {
            (None, None) => Ok(None),
            (Some(x), Some(y)) => Ok(Some([dim(x)?, dim(y)?])),
            _ => Err(ServiceError::InvalidRequest("x and y must be given together".into())),
        }
    }
}

async fn create(State(m): State<AppState>, body: Bytes) -> Result<impl IntoResponse, ServiceError> {
    let req: CreateSession = if body.iter().all(u8::is_ascii_whitespace) {
        CreateSession::default()
    } else {
        parse(&body)?
    };
    let target = req.graph.map(graph_from).transpose()?;
    let dims = req.dims.map(dims_from).transpose()?;
    let manager = m.clone();
    let session = tokio::task::spawn_blocking(move || manager.create(target, req.constraints, dims))
        .await
        .map_err(|_| ServiceError::WorkerGone)?;
    let info = session.call(|w| w.info()).await?;
    Ok((StatusCode::CREATED, Json(info)))
}

async fn list(State(m): State<AppState>) -> Json<Vec<String>> {
    Json(m.ids())
}

async fn info(State(m): State<AppState>, Path(id): Path<String>) -> Reply<SessionInfo> {
    Ok(Json(m.get(&id)?.call(|w| w.info()).await?))
}

async fn remove(State(m): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ServiceError> {
    m.get(&id)?;
    tokio::task::spawn_blocking(move || m.remove(&id))
        .await
        .map_err(|_| ServiceError::WorkerGone)??;
    Ok(StatusCode::NO_CONTENT)
}

async fn target(State(m): State<AppState>, Path(id): Path<String>) -> Reply<TargetAck> {
    Ok(Json(m.get(&id)?.call(|w| w.target_ack()).await?))
}

async fn update_target(State(m): State<AppState>, Path(id): Path<String>, body: Bytes) -> Reply<TargetAck> {
    let session = m.get(&id)?;
    let graph = graph_from(parse(&body)?)?;
    Ok(Json(session.call(move |w| w.update_target(graph)).await?))
}

async fn grid(State(m): State<AppState>, Path(id): Path<String>, Query(q): Query<ProjectionQuery>) -> Reply<Snapshot> {
    let session = m.get(&id)?;
    let projection = q.resolve()?;
    Ok(Json(session.call(move |w| w.snapshot(projection)).await?))
}

async fn elite(
    State(m): State<AppState>,
    Path((id, i, j)): Path<(String, usize, usize)>,
    Query(q): Query<ProjectionQuery>,
) -> Reply<EliteView> {
    let session = m.get(&id)?;
    let projection = q.resolve()?;
    Ok(Json(session.call(move |w| w.elite_view(projection, [i, j])).await??))
}

async fn adopt(
    State(m): State<AppState>,
    Path((id, i, j)): Path<(String, usize, usize)>,
    Query(q): Query<ProjectionQuery>,
) -> Reply<TargetAck> {
    let session = m.get(&id)?;
    let projection = q.resolve()?;
    Ok(Json(session.call(move |w| w.adopt(projection, [i, j])).await??))
}

async fn set_dimensions(State(m): State<AppState>, Path(id): Path<String>, body: Bytes) -> Reply<SessionInfo> {
    let session = m.get(&id)?;
    let dims = dims_from(parse(&body)?)?;
    Ok(Json(session.call(move |w| w.set_dimensions(dims)).await?))
}

async fn set_constraints(State(m): State<AppState>, Path(id): Path<String>, body: Bytes) -> Reply<SessionInfo> {
    let session = m.get(&id)?;
    let constraints: Option<LevelConstraints> = parse(&body)?;
    Ok(Json(session.call(move |w| w.set_constraints(constraints)).await?))
}

async fn pause(State(m): State<AppState>, Path(id): Path<String>) -> Reply<SessionInfo> {
    Ok(Json(m.get(&id)?.call(|w| w.set_status(Status::Paused)).await??))
}

async fn resume(State(m): State<AppState>, Path(id): Path<String>) -> Reply<SessionInfo> {
    Ok(Json(m.get(&id)?.call(|w| w.set_status(Status::Running)).await??))
}

/// Current snapshot first, then one per completed generation, never more
/// often than `interval`.
pub fn snapshot_stream(
    mut rx: watch::Receiver<Snapshot>,
    interval: Duration,
) -> impl Stream<Item = Snapshot> + Send + 'static {
    let first = rx.borrow_and_update().clone();
    stream::once(async move { first }).chain(stream::unfold(
        (rx, Instant::now()),
        move |(mut rx, last)| async move {
            tokio::time::sleep_until(last + interval).await;
            rx.changed().await.ok()?;
            let snap = rx.borrow_and_update().clone();
            Some((snap, (rx, Instant::now())))
        },
    ))
}

async fn stream_grid(
    State(m): State<AppState>,
    Path(id): Path<String>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, ServiceError> {
    let session: Arc<Session> = m.get(&id)?;
    let events = snapshot_stream(session.subscribe(), m.config().stream_interval).map(|snap| {
        let data = serde_json::to_string(&snap).expect("snapshots serialize");
        Ok(Event::default().event("snapshot").id(snap.generation.to_string()).data(data))
    });
    Ok(Sse::new(events).keep_alive(KeepAlive::default()))
}

//! HTTP API under `/api/v1`.
//!
//! Every response carries the model revision it was computed against in
//! the `x-model-revision` header; JSON reports repeat it in a `revision`
//! field. Mutations take the caller's last seen revision in `If-Match` and
//! answer 409 with the current revision when it is stale.

use std::collections::{BTreeMap, BTreeSet};
use std::net::SocketAddr;
use std::sync::Arc;

use archgraph_core::analytics::{CentralityKind, DistanceMode};
use archgraph_core::diffusion::KernelKind;
use archgraph_core::feed::FeedSource;
use archgraph_core::{CbmModel, Component, Edge, ModelError, NodeId};
use axum::body::Body;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, patch, post};
use axum::Router;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::net::TcpListener;

use crate::export::{export_graph, ExportFormat};
use crate::jobs::Jobs;
use crate::ops::{self, AnalyzeRequest, CommunityMethod, CommunityRequest, KernelSpec, OpsError, TypeFilter};
use crate::persist::{self, parse_document, ParseMode, PersistError};
use crate::store::{ModelStore, Snapshot, StoreError};

pub const REVISION_HEADER: &str = "x-model-revision";

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<ModelStore>,
    pub jobs: Arc<Jobs>,
}

pub fn router(store: Arc<ModelStore>) -> Router {
    let state = AppState { store, jobs: Jobs::new() };
    let api = Router::new()
        .route("/model", get(get_model).put(put_model))
        .route("/components", post(post_component))
        .route("/components/{id}", patch(patch_component).delete(delete_component))
        .route("/edges", post(post_edge))
        .route("/edges/{src}/{dst}/{relation_type}", delete(delete_edge))
        .route("/graph", get(get_graph))
        .route("/analytics/degree-histogram", get(get_histogram))
        .route("/analytics/{metric}", get(get_analytics))
        .route("/communities", get(get_communities))
        .route("/diffusion", post(post_diffusion))
        .route("/impact/signals", get(get_signals))
        .route("/impact/refresh", post(post_refresh))
        .route("/export", get(get_export))
        .route("/jobs/{id}", get(get_job).delete(cancel_job));
    Router::new()
        .nest("/api/v1", api)
        .fallback(not_found)
        .with_state(state)
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot bind {addr}: {reason}")]
    Bind { addr: String, reason: String },
    #[error("server stopped: {0}")]
    Io(#[from] std::io::Error),
}

pub async fn bind(addr: &str) -> Result<TcpListener, ServeError> {
    TcpListener::bind(addr).await.map_err(|e| ServeError::Bind {
        addr: addr.to_owned(),
        reason: e.to_string(),
    })
}

/// Serves the API on an already bound listener until the task is dropped.
pub async fn serve_on(listener: TcpListener, store: Arc<ModelStore>) -> Result<(), ServeError> {
    axum::serve(listener, router(store)).await?;
    Ok(())
}

pub async fn serve(store: Arc<ModelStore>, addr: &str) -> Result<(), ServeError> {
    let listener = bind(addr).await?;
    let local: SocketAddr = listener.local_addr()?;
    tracing::info!(%local, revision = store.revision(), "serving archgraph API");
    serve_on(listener, store).await
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    revision: u64,
    current_revision: Option<u64>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    revision: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    current_revision: Option<u64>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>, revision: u64) -> Self {
        Self {
            status,
            message: message.into(),
            revision,
            current_revision: None,
        }
    }

    fn bad_request(message: impl Into<String>, revision: u64) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message, revision)
    }

    fn from_store(e: StoreError, revision: u64) -> Self {
        match e {
            StoreError::Conflict { current, .. } => Self {
                status: StatusCode::CONFLICT,
                message: e.to_string(),
                revision: current,
                current_revision: Some(current),
            },
            StoreError::Model(m) => Self::from_model(m, revision),
            StoreError::Persist(p) => Self::new(StatusCode::INTERNAL_SERVER_ERROR, p.to_string(), revision),
            other => Self::bad_request(other.to_string(), revision),
        }
    }

    fn from_model(e: ModelError, revision: u64) -> Self {
        let status = match e {
            ModelError::UnknownComponent(_) | ModelError::UnknownEdge { .. } => StatusCode::NOT_FOUND,
            _ => StatusCode::BAD_REQUEST,
        };
        Self::new(status, e.to_string(), revision)
    }

    fn from_ops(e: OpsError, revision: u64) -> Self {
        match e {
            OpsError::Model(m) => Self::from_model(m, revision),
            OpsError::Diffusion(archgraph_core::diffusion::DiffusionError::UnknownSeed(id)) => {
                Self::bad_request(format!("unknown seed component '{id}'"), revision)
            }
            other => Self::bad_request(other.to_string(), revision),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: &self.message,
            revision: self.revision,
            current_revision: self.current_revision,
        };
        json_response(self.status, self.revision, &body)
    }
}

type ApiResult = Result<Response, ApiError>;

fn with_revision(mut resp: Response, revision: u64) -> Response {
    resp.headers_mut()
        .insert(REVISION_HEADER, HeaderValue::from(revision));
    resp
}

fn text_response(status: StatusCode, revision: u64, content_type: &'static str, body: String) -> Response {
    let mut resp = (status, Body::from(body)).into_response();
    resp.headers_mut()
        .insert(header::CONTENT_TYPE, HeaderValue::from_static(content_type));
    with_revision(resp, revision)
}

fn json_response<T: Serialize + ?Sized>(status: StatusCode, revision: u64, value: &T) -> Response {
    let body = serde_json::to_string(value).expect("response serializes");
    text_response(status, revision, "application/json", body)
}

fn model_response(status: StatusCode, model: &CbmModel) -> Response {
    text_response(status, model.revision(), "application/json", persist::to_string(model))
}

async fn not_found(State(state): State<AppState>) -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "no such endpoint", state.store.revision())
}

type Params = Query<BTreeMap<String, String>>;

/// Typed view over query parameters that rejects keys it was not asked about.
struct QueryArgs<'a> {
    params: &'a BTreeMap<String, String>,
    revision: u64,
}

impl<'a> QueryArgs<'a> {
    fn new(params: &'a BTreeMap<String, String>, revision: u64, allowed: &[&str]) -> Result<Self, ApiError> {
        if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(ApiError::bad_request(
                format!("unknown query parameter '{k}' (expected one of: {})", allowed.join(", ")),
                revision,
            ));
        }
        Ok(Self { params, revision })
    }

    fn get(&self, key: &str) -> Option<&'a str> {
        self.params.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ApiError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| ApiError::bad_request(format!("invalid {key} '{v}': {e}"), self.revision))
            })
            .transpose()
    }

    fn types(&self) -> TypeFilter {
        ops::parse_types(self.get("types"))
    }

    fn mode(&self) -> Result<ParseMode, ApiError> {
        Ok(ParseMode::lax(self.parse::<bool>("lax")?.unwrap_or(false)))
    }
}

fn expected_revision(headers: &HeaderMap, current: u64) -> Result<Option<u64>, ApiError> {
    let Some(v) = headers.get(header::IF_MATCH) else {
        return Ok(None);
    };
    let raw = v.to_str().unwrap_or_default().trim();
    let raw = raw.strip_prefix("W/").unwrap_or(raw).trim_matches('"');
    raw.parse()
        .map(Some)
        .map_err(|_| ApiError::bad_request(format!("If-Match must carry a model revision number, got '{raw}'"), current))
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &str, mode: ParseMode, revision: u64) -> Result<T, ApiError> {
    parse_document(body, mode).map_err(|e: PersistError| ApiError::bad_request(e.to_string(), revision))
}

async fn blocking<T, F>(revision: u64, f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), revision))?
}

async fn get_model(State(state): State<AppState>) -> Response {
    model_response(StatusCode::OK, &state.store.snapshot().model_arc())
}

async fn put_model(State(state): State<AppState>, Query(q): Params, headers: HeaderMap, body: String) -> ApiResult {
    let rev = state.store.revision();
    let args = QueryArgs::new(&q, rev, &["lax"])?;
    let expected = expected_revision(&headers, rev)?;
    let model: CbmModel = parse_body(&body, args.mode()?, rev)?;
    let snap = state
        .store
        .replace(expected, model)
        .map_err(|e| ApiError::from_store(e, rev))?;
    Ok(model_response(StatusCode::OK, &snap.model_arc()))
}

async fn post_component(State(state): State<AppState>, Query(q): Params, headers: HeaderMap, body: String) -> ApiResult {
    let rev = state.store.revision();
    let args = QueryArgs::new(&q, rev, &["lax"])?;
    let expected = expected_revision(&headers, rev)?;
    let component: Component = parse_body(&body, args.mode()?, rev)?;
    let snap = state
        .store
        .mutate(expected, |m| {
            if m.component(&component.id).is_some() {
                return Err(StoreError::Rejected(format!(
                    "component '{}' already exists; use PATCH to change it",
                    component.id
                )));
            }
            m.upsert_component(component).map_err(StoreError::from)
        })
        .map_err(|e| ApiError::from_store(e, rev))?;
    Ok(model_response(StatusCode::CREATED, &snap.model_arc()))
}

async fn patch_component(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Params,
    headers: HeaderMap,
    body: String,
) -> ApiResult {
    let rev = state.store.revision();
    let args = QueryArgs::new(&q, rev, &["lax"])?;
    let lax = args.mode()? == ParseMode::Lax;
    let expected = expected_revision(&headers, rev)?;
    let patch: serde_json::Map<String, serde_json::Value> = parse_body(&body, ParseMode::Lax, rev)?;
    let id = NodeId::from(id);
    let snap = state
        .store
        .mutate(expected, |m| {
            let current = m
                .component(&id)
                .ok_or_else(|| StoreError::Model(ModelError::UnknownComponent(id.clone())))?;
            let mut merged = match serde_json::to_value(current).expect("component serializes") {
                serde_json::Value::Object(map) => map,
                _ => unreachable!("components serialize as objects"),
            };
            for (k, v) in patch {
                if k == "id" && v.as_str() != Some(id.as_str()) {
                    return Err(StoreError::Rejected("a component's id cannot be changed".into()));
                }
                if !merged.contains_key(&k) {
                    if lax {
                        continue;
                    }
                    return Err(StoreError::Rejected(format!("unknown key `{k}`")));
                }
                merged.insert(k, v);
            }
            let updated: Component = serde_json::from_value(serde_json::Value::Object(merged))
                .map_err(|e| StoreError::Rejected(format!("invalid component: {e}")))?;
            m.upsert_component(updated).map_err(StoreError::from)
        })
        .map_err(|e| ApiError::from_store(e, rev))?;
    Ok(model_response(StatusCode::OK, &snap.model_arc()))
}

async fn delete_component(State(state): State<AppState>, Path(id): Path<String>, headers: HeaderMap) -> ApiResult {
    let rev = state.store.revision();
    let expected = expected_revision(&headers, rev)?;
    let snap = state
        .store
        .mutate(expected, |m| m.remove_component(&NodeId::from(id)))
        .map_err(|e| ApiError::from_store(e, rev))?;
    Ok(model_response(StatusCode::OK, &snap.model_arc()))
}

async fn post_edge(State(state): State<AppState>, Query(q): Params, headers: HeaderMap, body: String) -> ApiResult {
    let rev = state.store.revision();
    let args = QueryArgs::new(&q, rev, &["lax"])?;
    let expected = expected_revision(&headers, rev)?;
    let edge: Edge = parse_body(&body, args.mode()?, rev)?;
    let snap = state
        .store
        .mutate(expected, |m| m.connect(&edge.source, &edge.target, &edge.relation_type, edge.weight))
        .map_err(|e| ApiError::from_store(e, rev))?;
    Ok(model_response(StatusCode::CREATED, &snap.model_arc()))
}

async fn delete_edge(
    State(state): State<AppState>,
    Path((src, dst, relation_type)): Path<(String, String, String)>,
    headers: HeaderMap,
) -> ApiResult {
    let rev = state.store.revision();
    let expected = expected_revision(&headers, rev)?;
    let snap = state
        .store
        .mutate(expected, |m| m.disconnect(&NodeId::from(src), &NodeId::from(dst), &relation_type))
        .map_err(|e| ApiError::from_store(e, rev))?;
    Ok(model_response(StatusCode::OK, &snap.model_arc()))
}

async fn get_graph(State(state): State<AppState>, Query(q): Params) -> ApiResult {
    let snap = state.store.snapshot();
    let rev = snap.revision();
    let args = QueryArgs::new(&q, rev, &["types"])?;
    let view = ops::graph_view(&*snap, &args.types()).map_err(|e| ApiError::from_ops(e, rev))?;
    Ok(json_response(StatusCode::OK, rev, &view))
}

fn analyze_request(args: &QueryArgs, metric: &str) -> Result<AnalyzeRequest, ApiError> {
    let metric: CentralityKind = metric
        .parse()
        .map_err(|e: archgraph_core::analytics::AnalyticsError| ApiError::bad_request(e.to_string(), args.revision))?;
    let mut req = AnalyzeRequest::new(metric);
    req.edge_types = args.types();
    if let Some(d) = args.parse::<DistanceMode>("distance")? {
        req.distance = d;
    }
    req.weighted = args.parse("weighted")?.unwrap_or(req.weighted);
    req.normalized = args.parse("normalized")?.unwrap_or(req.normalized);
    req.damping = args.parse("damping")?.unwrap_or(req.damping);
    req.tol = args.parse("tol")?.unwrap_or(req.tol);
    req.max_iter = args.parse("max_iter")?.unwrap_or(req.max_iter);
    Ok(req)
}

fn run_job<T, F>(state: &AppState, snap: &Arc<Snapshot>, kind: &str, work: F) -> Response
where
    T: Serialize,
    F: FnOnce(&Snapshot) -> Result<T, OpsError> + Send + 'static,
{
    let rev = snap.revision();
    let snap = Arc::clone(snap);
    let id = state.jobs.spawn(kind, rev, move || {
        work(&snap)
            .map(|r| serde_json::to_value(r).expect("report serializes"))
            .map_err(|e| e.to_string())
    });
    let status = state.jobs.status(id).expect("job was just registered");
    let mut resp = json_response(StatusCode::ACCEPTED, rev, &status);
    resp.headers_mut().insert(
        header::LOCATION,
        HeaderValue::from_str(&format!("/api/v1/jobs/{id}")).expect("ascii path"),
    );
    resp
}

async fn get_analytics(State(state): State<AppState>, Path(metric): Path<String>, Query(q): Params) -> ApiResult {
    let snap = state.store.snapshot();
    let rev = snap.revision();
    let args = QueryArgs::new(&q, rev, &["types", "distance", "weighted", "normalized", "damping", "tol", "max_iter", "async"])?;
    let req = analyze_request(&args, &metric)?;
    if args.parse::<bool>("async")?.unwrap_or(false) {
        return Ok(run_job(&state, &snap, "analytics", move |s| ops::analyze(s, &req, s.committed_at())));
    }
    let report = blocking(rev, move || {
        ops::analyze(&*snap, &req, snap.committed_at()).map_err(|e| ApiError::from_ops(e, rev))
    })
    .await?;
    Ok(json_response(StatusCode::OK, rev, &report))
}

async fn get_histogram(State(state): State<AppState>, Query(q): Params) -> ApiResult {
    let snap = state.store.snapshot();
    let rev = snap.revision();
    let args = QueryArgs::new(&q, rev, &["types"])?;
    let report = ops::histogram(&*snap, &args.types(), snap.committed_at()).map_err(|e| ApiError::from_ops(e, rev))?;
    Ok(json_response(StatusCode::OK, rev, &report))
}

async fn get_communities(State(state): State<AppState>, Query(q): Params) -> ApiResult {
    let snap = state.store.snapshot();
    let rev = snap.revision();
    let args = QueryArgs::new(&q, rev, &["method", "k", "seed", "max_iter", "types"])?;
    let method = args.parse::<CommunityMethod>("method")?.unwrap_or(CommunityMethod::Gn);
    let mut req = CommunityRequest::new(method);
    req.k = args.parse("k")?;
    req.seed = args.parse("seed")?.unwrap_or(req.seed);
    req.max_iter = args.parse("max_iter")?.unwrap_or(req.max_iter);
    req.edge_types = args.types();
    let report = blocking(rev, move || {
        ops::communities(&*snap, &req, snap.committed_at()).map_err(|e| ApiError::from_ops(e, rev))
    })
    .await?;
    Ok(json_response(StatusCode::OK, rev, &report))
}

/// Body of `POST /diffusion`.
#[derive(Debug, Clone, Deserialize)]
pub struct DiffusionBody {
    pub kernel: String,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub restart: Option<f64>,
    pub seeds: BTreeMap<NodeId, f64>,
    #[serde(default)]
    pub edge_types: Option<BTreeSet<String>>,
    #[serde(default)]
    pub normalize: bool,
    #[serde(default, rename = "async")]
    pub run_async: bool,
}

async fn post_diffusion(State(state): State<AppState>, Query(q): Params, body: String) -> ApiResult {
    let snap = state.store.snapshot();
    let rev = snap.revision();
    let args = QueryArgs::new(&q, rev, &["lax"])?;
    let body: DiffusionBody = parse_body(&body, args.mode()?, rev)?;
    let kind: KernelKind = body
        .kernel
        .parse()
        .map_err(|e: archgraph_core::diffusion::DiffusionError| ApiError::bad_request(e.to_string(), rev))?;
    let spec = KernelSpec {
        kind,
        alpha: body.alpha,
        restart: body.restart,
        normalize: body.normalize,
    };
    let filter = body.edge_types.filter(|t| !t.is_empty());
    let seeds = body.seeds;
    if body.run_async {
        return Ok(run_job(&state, &snap, "diffusion", move |s| {
            ops::diffuse(s, &filter, &spec, &seeds, s.committed_at())
        }));
    }
    let report = blocking(rev, move || {
        ops::diffuse(&*snap, &filter, &spec, &seeds, snap.committed_at()).map_err(|e| ApiError::from_ops(e, rev))
    })
    .await?;
    Ok(json_response(StatusCode::OK, rev, &report))
}

async fn get_signals(State(state): State<AppState>) -> ApiResult {
    let snap = state.store.snapshot();
    let rev = snap.revision();
    let store = Arc::clone(&state.store);
    let report = blocking(rev, move || store.signals(&snap).map_err(|e| ApiError::from_ops(e, rev))).await?;
    Ok(json_response(StatusCode::OK, rev, &*report))
}

/// Body of `POST /impact/refresh`; no body polls the configured feeds.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct RefreshBody {
    #[serde(default)]
    pub sources: Vec<String>,
}

async fn post_refresh(State(state): State<AppState>, body: String) -> ApiResult {
    let rev = state.store.revision();
    let body: RefreshBody = if body.trim().is_empty() {
        RefreshBody::default()
    } else {
        parse_body(&body, ParseMode::Strict, rev)?
    };
    let sources: Vec<FeedSource> = body.sources.iter().map(|s| FeedSource::parse(s)).collect();
    let store = Arc::clone(&state.store);
    let (snap, report) = blocking(rev, move || {
        store.ingest(&sources);
        store.invalidate_signals();
        let snap = store.snapshot();
        let rev = snap.revision();
        let report = store.signals(&snap).map_err(|e| ApiError::from_ops(e, rev))?;
        Ok((snap, report))
    })
    .await?;
    Ok(json_response(StatusCode::OK, snap.revision(), &*report))
}

async fn get_export(State(state): State<AppState>, Query(q): Params) -> ApiResult {
    let snap = state.store.snapshot();
    let rev = snap.revision();
    let args = QueryArgs::new(&q, rev, &["format", "types"])?;
    let format: ExportFormat = args.parse("format")?.unwrap_or(ExportFormat::Dot);
    let doc = export_graph(&snap.model_arc(), args.types().as_ref(), format)
        .map_err(|e| ApiError::bad_request(e.to_string(), rev))?;
    Ok(text_response(StatusCode::OK, rev, format.content_type(), doc))
}

fn job_id(raw: &str, revision: u64) -> Result<u64, ApiError> {
    raw.parse()
        .map_err(|_| ApiError::bad_request(format!("invalid job id '{raw}'"), revision))
}

async fn get_job(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let rev = state.store.revision();
    let id = job_id(&id, rev)?;
    let status = state
        .jobs
        .status(id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no job {id}"), rev))?;
    Ok(json_response(StatusCode::OK, status.revision, &status))
}

async fn cancel_job(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let rev = state.store.revision();
    let id = job_id(&id, rev)?;
    let status = state
        .jobs
        .cancel(id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no job {id}"), rev))?;
    Ok(json_response(StatusCode::OK, status.revision, &status))
}

//! The registry HTTP service.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{SubsecRound, Utc};
use plexflow_core::manifest::{emit_code_template, parse_manifest, resolve, Manifest, ManifestError, StepManifest, WorkflowManifest};
use plexflow_core::model::{plan_iri, FairWorkflow};
use plexflow_core::nanopub::{Nanopub, Profile};
use plexflow_core::registry::{
    fetch_step, fetch_workflow, publish_step, publish_workflow, Kind, LocalRegistry, Registry, RegistryError,
};
use plexflow_core::vocab;
use serde::Deserialize;
use serde_json::json;
use tower_http::services::ServeDir;

pub struct AppState {
    pub registry: LocalRegistry,
    /// Signs manifests posted to `/publish`; without it that route is disabled.
    pub profile: Option<Profile>,
}

struct ApiError(StatusCode, serde_json::Value);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(self.1)).into_response()
    }
}

fn error(status: StatusCode, message: impl ToString) -> ApiError {
    ApiError(status, json!({ "error": message.to_string() }))
}

impl From<RegistryError> for ApiError {
    fn from(e: RegistryError) -> Self {
        match e {
            RegistryError::Rejected(report) => ApiError(
                StatusCode::UNPROCESSABLE_ENTITY,
                json!({ "error": format!("verification failed: {}", report.problems.join("; ")), "report": report }),
            ),
            RegistryError::NotFound(_) => error(StatusCode::NOT_FOUND, e),
            RegistryError::Conflict(_) => error(StatusCode::CONFLICT, e),
            RegistryError::Query(_) | RegistryError::Nanopub(_) | RegistryError::Model(_) => error(StatusCode::BAD_REQUEST, e),
            RegistryError::Partial { ref cause, .. } if matches!(**cause, RegistryError::Rejected(_)) => {
                error(StatusCode::UNPROCESSABLE_ENTITY, e)
            }
            _ => error(StatusCode::INTERNAL_SERVER_ERROR, e),
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn utf8(body: &Bytes) -> ApiResult<&str> {
    std::str::from_utf8(body).map_err(|_| error(StatusCode::BAD_REQUEST, "body is not UTF-8"))
}

async fn post_np(State(s): State<Arc<AppState>>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let np = Nanopub::from_trig(utf8(&body)?).map_err(|e| error(StatusCode::BAD_REQUEST, e))?;
    let uri = s.registry.publish(&np)?;
    Ok((StatusCode::CREATED, Json(json!({ "uri": uri }))))
}

async fn get_np(State(s): State<Arc<AppState>>, Path(code): Path<String>) -> ApiResult<impl IntoResponse> {
    let np = s.registry.fetch(&code)?;
    Ok(([(header::CONTENT_TYPE, "application/trig; charset=utf-8")], np.to_trig()))
}

#[derive(Deserialize)]
struct SearchParams {
    #[serde(default)]
    q: String,
}

async fn search(State(s): State<Arc<AppState>>, Query(p): Query<SearchParams>) -> ApiResult<impl IntoResponse> {
    Ok(Json(s.registry.search(&p.q)?))
}

#[derive(Deserialize)]
struct ListParams {
    kind: Option<String>,
}

async fn list(State(s): State<Arc<AppState>>, Query(p): Query<ListParams>) -> ApiResult<impl IntoResponse> {
    let kind = p.kind.map(|k| k.parse::<Kind>()).transpose().map_err(|e| error(StatusCode::BAD_REQUEST, e))?;
    Ok(Json(s.registry.list(kind)?))
}

async fn query(State(s): State<Arc<AppState>>, body: Bytes) -> ApiResult<impl IntoResponse> {
    Ok(Json(s.registry.query(utf8(&body)?)?))
}

fn resolve_manifest(reg: &LocalRegistry, text: &str) -> Result<(Manifest, Option<FairWorkflow>), ManifestError> {
    let manifest = parse_manifest(text)?;
    let workflow = match &manifest {
        Manifest::Workflow(m) => Some(resolve(m, |uri: &str| fetch_step(reg, uri))?),
        Manifest::Step(_) => None,
    };
    Ok((manifest, workflow))
}

async fn validate(State(s): State<Arc<AppState>>, body: Bytes) -> ApiResult<Response> {
    Ok(match resolve_manifest(&s.registry, utf8(&body)?) {
        Ok((Manifest::Step(_), _)) => Json(json!({ "valid": true, "kind": "step", "steps": 1 })).into_response(),
        Ok((Manifest::Workflow(m), _)) => Json(json!({ "valid": true, "kind": "workflow", "steps": m.steps.len() })).into_response(),
        Err(e) => (StatusCode::UNPROCESSABLE_ENTITY, Json(json!({ "valid": false, "error": e.to_string() }))).into_response(),
    })
}

async fn publish(State(s): State<Arc<AppState>>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let profile = s.profile.as_ref().ok_or_else(|| error(StatusCode::SERVICE_UNAVAILABLE, "server has no signing profile"))?;
    let (manifest, workflow) = resolve_manifest(&s.registry, utf8(&body)?).map_err(|e| error(StatusCode::UNPROCESSABLE_ENTITY, e))?;
    let created = Utc::now().trunc_subsecs(3);
    let body = match (manifest, workflow) {
        (Manifest::Workflow(_), Some(w)) => {
            let p = publish_workflow(&s.registry, &w, profile, created)?;
            let steps: serde_json::Map<_, _> = p.step_uris.iter().map(|(id, uri)| (id.clone(), json!(uri))).collect();
            json!({ "kind": "workflow", "plan": p.plan_uri, "steps": steps, "nanopubs": p.nanopubs })
        }
        (Manifest::Step(m), _) => {
            let np = publish_step(&s.registry, &m.to_step(), profile, created)?;
            json!({ "kind": "step", "nanopubs": [np.uri()] })
        }
        (Manifest::Workflow(_), None) => unreachable!("workflow manifests always resolve to a workflow"),
    };
    Ok((StatusCode::CREATED, Json(body)))
}

async fn template(State(s): State<Arc<AppState>>, Path(code): Path<String>) -> ApiResult<impl IntoResponse> {
    let step = fetch_step(&s.registry, &code)?;
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], emit_code_template(&step)))
}

fn is_plan(np: &Nanopub) -> bool {
    let plan = plan_iri(np.uri());
    np.dataset().iter().any(|q| q.subject.as_iri() == Some(plan.as_str()) && q.object.as_iri() == Some(vocab::PPLAN_PLAN))
}

/// The manifest describing a published step or workflow.
pub fn manifest_of(reg: &dyn Registry, uri: &str) -> Result<String, RegistryError> {
    let np = reg.fetch(uri)?;
    if is_plan(&np) {
        Ok(WorkflowManifest::from_workflow(&fetch_workflow(reg, uri)?).to_yaml())
    } else {
        Ok(StepManifest::from_step(&fetch_step(reg, uri)?).to_yaml())
    }
}

async fn manifest(State(s): State<Arc<AppState>>, Path(code): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(([(header::CONTENT_TYPE, "application/yaml; charset=utf-8")], manifest_of(&s.registry, &code)?))
}

pub fn router(state: Arc<AppState>, ui: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/np", post(post_np))
        .route("/np/{code}", get(get_np))
        .route("/search", get(search))
        .route("/list", get(list))
        .route("/query", post(query))
        .route("/validate", post(validate))
        .route("/publish", post(publish))
        .route("/template/{code}", get(template))
        .route("/manifest/{code}", get(manifest))
        .with_state(state);
    match ui {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Serves until the process is stopped, calling `ready` with the bound address.
pub async fn serve(addr: SocketAddr, app: Router, ready: impl FnOnce(SocketAddr)) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    ready(listener.local_addr()?);
    axum::serve(listener, app).await
}

//! HTTP service for tuning prominence coefficients and the threshold fraction
//! by eye.
//!
//! Sessions live in memory. Every image or params request recomputes the
//! merge from the session's current state; nothing is cached.
//!
//! | method | path                        | body / response                     |
//! |--------|-----------------------------|-------------------------------------|
//! | POST   | `/sessions`                 | → `{"id"}`                          |
//! | POST   | `/sessions/{id}/images`     | PGM → `{"index","rows","cols"}`     |
//! | PUT    | `/sessions/{id}/params`     | params JSON → validated params      |
//! | GET    | `/sessions/{id}/merged.pgm` | merged image (P5)                   |
//! | GET    | `/sessions/{id}/spectrum.pgm` | heatmap of the merged spectrum    |
//! | GET    | `/sessions/{id}/report`     | reduction report JSON               |
//! | DELETE | `/sessions/{id}`            | 204                                 |

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use specmerge::{
    merge_spectral, read_pgm, spectrum_heatmap, write_pgm, AlignMode, AlignmentPolicy, ImagePlane,
    MergeConfig, PgmDepth, Renorm, SpectralMerge,
};
use tower_http::cors::CorsLayer;

const MAX_UPLOAD_BYTES: usize = 64 * 1024 * 1024;

/// Tuning parameters as they travel over the wire.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Params {
    pub coeffs: Vec<f64>,
    pub threshold_frac: f64,
    pub renorm: Renorm,
    pub align: AlignMode,
}

impl Params {
    fn defaults(images: usize) -> Self {
        Self {
            coeffs: vec![1.0; images],
            threshold_frac: 0.0,
            renorm: Renorm::default(),
            align: AlignMode::default(),
        }
    }

    pub fn to_config(&self) -> MergeConfig {
        MergeConfig::default()
            .with_coefficients(self.coeffs.clone())
            .with_threshold_fraction(self.threshold_frac)
            .with_renorm(self.renorm)
            .with_alignment(AlignmentPolicy::from(self.align))
    }
}

/// PUT body. Omitted fields take their defaults; the result replaces the
/// session's params wholesale.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsBody {
    coeffs: Option<Vec<f64>>,
    threshold_frac: Option<f64>,
    renorm: Option<Renorm>,
    align: Option<AlignMode>,
}

#[derive(Debug, Clone)]
struct Session {
    planes: Vec<Arc<ImagePlane>>,
    params: Params,
}

#[derive(Clone, Default)]
pub struct AppState {
    sessions: Arc<RwLock<HashMap<String, Arc<Mutex<Session>>>>>,
}

impl AppState {
    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))
    }

    fn snapshot(&self, id: &str) -> Result<Session, ApiError> {
        Ok(self.session(id)?.lock().unwrap().clone())
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    field: Option<&'static str>,
    message: String,
}

impl ApiError {
    fn bad_request(field: Option<&'static str>, message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            field,
            message: message.into(),
        }
    }

    fn not_found(id: &str) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            field: None,
            message: format!("no session {id}"),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            field: None,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = match self.field {
            Some(field) => json!({ "error": self.message, "field": field }),
            None => json!({ "error": self.message }),
        };
        (self.status, Json(body)).into_response()
    }
}

pub fn router() -> Router {
    router_with_state(AppState::default())
}

pub fn router_with_state(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", axum::routing::delete(delete_session))
        .route("/sessions/{id}/images", post(upload_image))
        .route("/sessions/{id}/params", put(put_params).get(get_params))
        .route("/sessions/{id}/merged.pgm", get(merged_pgm))
        .route("/sessions/{id}/spectrum.pgm", get(spectrum_pgm))
        .route("/sessions/{id}/report", get(report))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .layer(CorsLayer::permissive())
        .with_state(state)
}

/// Binds `addr` and serves until the process exits.
pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("tuner listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router()).await
}

async fn create_session(State(state): State<AppState>) -> impl IntoResponse {
    let id = uuid::Uuid::new_v4().simple().to_string();
    let session = Session {
        planes: Vec::new(),
        params: Params::defaults(0),
    };
    state
        .sessions
        .write()
        .unwrap()
        .insert(id.clone(), Arc::new(Mutex::new(session)));
    (StatusCode::CREATED, Json(json!({ "id": id })))
}

async fn delete_session(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<StatusCode, ApiError> {
    match state.sessions.write().unwrap().remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::not_found(&id)),
    }
}

async fn upload_image(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<impl IntoResponse, ApiError> {
    let session = state.session(&id)?;
    let plane =
        read_pgm(&body).map_err(|e| ApiError::bad_request(None, format!("malformed PGM: {e}")))?;
    let (rows, cols) = plane.dims();
    let mut guard = session.lock().unwrap();
    guard.planes.push(Arc::new(plane));
    guard.params.coeffs.push(1.0);
    let index = guard.planes.len() - 1;
    Ok((
        StatusCode::CREATED,
        Json(json!({ "index": index, "rows": rows, "cols": cols })),
    ))
}

async fn get_params(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<Params>, ApiError> {
    Ok(Json(state.snapshot(&id)?.params))
}

async fn put_params(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Params>, ApiError> {
    let session = state.session(&id)?;
    let body: ParamsBody = serde_json::from_slice(&body)
        .map_err(|e| ApiError::bad_request(None, format!("invalid params body: {e}")))?;

    let mut guard = session.lock().unwrap();
    let images = guard.planes.len();
    let coeffs = body.coeffs.unwrap_or_else(|| vec![1.0; images]);
    if coeffs.len() != images {
        return Err(ApiError::bad_request(
            Some("coeffs"),
            format!("{} coefficients given for {images} images", coeffs.len()),
        ));
    }
    if let Some(i) = coeffs.iter().position(|a| !a.is_finite()) {
        return Err(ApiError::bad_request(
            Some("coeffs"),
            format!("coefficient {i} is not finite"),
        ));
    }
    let threshold_frac = body.threshold_frac.unwrap_or(0.0);
    if !(0.0..1.0).contains(&threshold_frac) {
        return Err(ApiError::bad_request(
            Some("threshold_frac"),
            format!("threshold_frac must satisfy 0 <= x < 1, got {threshold_frac}"),
        ));
    }
    guard.params = Params {
        coeffs,
        threshold_frac,
        renorm: body.renorm.unwrap_or_default(),
        align: body.align.unwrap_or_default(),
    };
    Ok(Json(guard.params.clone()))
}

async fn compute(state: &AppState, id: &str) -> Result<SpectralMerge, ApiError> {
    let session = state.snapshot(id)?;
    if session.planes.is_empty() {
        return Err(ApiError::bad_request(None, "session has no images"));
    }
    tokio::task::spawn_blocking(move || {
        let planes: Vec<ImagePlane> = session.planes.iter().map(|p| (**p).clone()).collect();
        merge_spectral(&planes, &session.params.to_config())
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))?
    .map_err(|e| ApiError::bad_request(None, e.to_string()))
}

fn pgm_response(plane: &ImagePlane) -> Response {
    (
        [(header::CONTENT_TYPE, "application/octet-stream")],
        write_pgm(plane, PgmDepth::Eight),
    )
        .into_response()
}

async fn merged_pgm(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    Ok(pgm_response(&compute(&state, &id).await?.merged))
}

async fn spectrum_pgm(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    Ok(pgm_response(&spectrum_heatmap(
        &compute(&state, &id).await?.spectrum,
    )))
}

async fn report(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let merge = compute(&state, &id).await?;
    Ok((
        [(header::CONTENT_TYPE, "application/json")],
        merge.report.to_json(),
    )
        .into_response())
}

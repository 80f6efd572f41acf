//! HTTP routes over [`Service`]. Store access is blocking file I/O, so each
//! handler runs its service call on the blocking pool.

use std::any::Any;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use patternquest_core::economy::Avatar;
use patternquest_core::persistence::Settings;
use patternquest_core::Difficulty;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use tower_http::catch_panic::CatchPanicLayer;

use crate::error::ApiError;
use crate::service::Service;

/// Test-mode header carrying a decimal session seed.
pub const SEED_HEADER: &str = "x-session-seed";

type AppState = State<Arc<Service>>;
type ApiResult<T> = Result<T, ApiError>;

pub fn router(service: Arc<Service>) -> Router {
    Router::new()
        .route("/players", post(register))
        .route("/players/{id}", get(player))
        .route("/players/{id}/settings", put(settings))
        .route("/players/{id}/shop/purchase", post(purchase))
        .route("/players/{id}/shop/equip", post(equip))
        .route("/players/{id}/quests", get(quests))
        .route("/players/{id}/sessions", post(start_session))
        .route("/catalog/avatars", get(catalog))
        .route("/sessions/{sid}", get(session))
        .route("/sessions/{sid}/roll", post(roll))
        .route("/sessions/{sid}/answer", post(answer))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .method_not_allowed_fallback(|| async {
            ApiError::new("MethodNotAllowed", 405, "method not allowed on this endpoint")
        })
        .layer(CatchPanicLayer::custom(panic_response))
        .with_state(service)
}

fn panic_response(_: Box<dyn Any + Send + 'static>) -> Response {
    ApiError::internal("request handler failed").into_response()
}

async fn blocking<T: Send + 'static>(
    service: Arc<Service>,
    f: impl FnOnce(&Service) -> ApiResult<T> + Send + 'static,
) -> ApiResult<T> {
    tokio::task::spawn_blocking(move || f(&service))
        .await
        .map_err(|_| ApiError::internal("request handler failed"))?
}

fn parse<T: DeserializeOwned>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::invalid_request(format!("bad request body: {e}")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegisterBody {
    name: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AvatarBody {
    avatar_id: String,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct StartBody {
    difficulty: Option<Difficulty>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AnswerBody {
    choice: usize,
}

async fn register(State(s): AppState, body: Bytes) -> ApiResult<impl IntoResponse> {
    let body: RegisterBody = parse(&body)?;
    let view = blocking(s, move |s| s.register(&body.name)).await?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn player(State(s): AppState, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(s, move |s| s.player(&id)).await?))
}

async fn settings(State(s): AppState, Path(id): Path<String>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let settings: Settings = parse(&body)?;
    Ok(Json(blocking(s, move |s| s.update_settings(&id, settings)).await?))
}

async fn purchase(State(s): AppState, Path(id): Path<String>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let body: AvatarBody = parse(&body)?;
    Ok(Json(blocking(s, move |s| s.purchase(&id, &body.avatar_id)).await?))
}

async fn equip(State(s): AppState, Path(id): Path<String>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let body: AvatarBody = parse(&body)?;
    Ok(Json(blocking(s, move |s| s.equip(&id, &body.avatar_id)).await?))
}

async fn quests(State(s): AppState, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(s, move |s| s.quests(&id)).await?))
}

async fn catalog(State(s): AppState) -> Json<Vec<Avatar>> {
    Json(s.catalog().entries().to_vec())
}

async fn start_session(
    State(s): AppState,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Bytes,
) -> ApiResult<impl IntoResponse> {
    let body: StartBody = if body.iter().all(u8::is_ascii_whitespace) {
        StartBody::default()
    } else {
        parse(&body)?
    };
    let seed = match headers.get(SEED_HEADER) {
        None => None,
        Some(v) => Some(
            v.to_str()
                .ok()
                .and_then(|t| t.trim().parse::<u64>().ok())
                .ok_or_else(|| ApiError::invalid_request(format!("{SEED_HEADER} must be a decimal u64")))?,
        ),
    };
    let difficulty = body.difficulty.unwrap_or(Difficulty::Easy);
    let view = blocking(s, move |s| s.start_session(&id, difficulty, seed)).await?;
    Ok((StatusCode::CREATED, Json(view)))
}

async fn session(State(s): AppState, Path(sid): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(s, move |s| s.session(&sid)).await?))
}

async fn roll(State(s): AppState, Path(sid): Path<String>) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(s, move |s| s.roll(&sid)).await?))
}

async fn answer(State(s): AppState, Path(sid): Path<String>, body: Bytes) -> ApiResult<impl IntoResponse> {
    let body: AnswerBody = parse(&body)?;
    Ok(Json(blocking(s, move |s| s.answer(&sid, body.choice)).await?))
}

/// Serves until Ctrl-C, then flushes the store.
pub async fn serve(service: Arc<Service>, bind: SocketAddr) -> Result<(), String> {
    let listener = tokio::net::TcpListener::bind(bind)
        .await
        .map_err(|e| format!("cannot bind {bind}: {e}"))?;
    let local = listener.local_addr().map_err(|e| e.to_string())?;
    eprintln!("listening on http://{local}");
    axum::serve(listener, router(service.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| e.to_string())?;
    service.flush().map_err(|e| e.to_string())
}

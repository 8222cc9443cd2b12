//! HTTP front end for the standards-participation engine.
//!
//! Every handler is a pure function of its request: there is no session,
//! cache or other shared state. Responses use one envelope:
//!
//! ```json
//! {"status":"ok","payload":{...}}
//! {"status":"error","error_code":"insufficient_data","error_detail":"..."}
//! ```
//!
//! A fit that fails to converge answers 422 and adds `best_so_far`.

pub mod documents;

use std::io;
use std::path::Path as FsPath;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, Request};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Serialize;
use serde_json::value::RawValue;
use stdpart_core::{Error, FitResult, Scenario};
use tokio::net::TcpListener;
use tower::ServiceExt;
use tower_http::services::ServeDir;

pub use documents::{
    case_document, decide_document, decide_outcome, fit_document, CaseDocument, CurvePoint, DecideDocument,
    DecideOptions, FitDocument, FitRequest,
};

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum Status {
    Ok,
    Error,
}

#[derive(Serialize)]
struct Envelope<'a> {
    status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    payload: Option<&'a RawValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error_code: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error_detail: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    best_so_far: Option<&'a FitResult>,
}

fn json_response(status: StatusCode, envelope: &Envelope<'_>) -> Response {
    match serde_json::to_string(envelope) {
        Ok(body) => (status, [(header::CONTENT_TYPE, "application/json")], body).into_response(),
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
    }
}

fn ok(payload: String) -> Response {
    match RawValue::from_string(payload) {
        Ok(raw) => json_response(
            StatusCode::OK,
            &Envelope { status: Status::Ok, payload: Some(&raw), error_code: None, error_detail: None, best_so_far: None },
        ),
        Err(e) => failure(StatusCode::INTERNAL_SERVER_ERROR, "internal", &e.to_string()),
    }
}

fn failure(status: StatusCode, code: &str, detail: &str) -> Response {
    json_response(
        status,
        &Envelope {
            status: Status::Error,
            payload: None,
            error_code: Some(code),
            error_detail: Some(detail),
            best_so_far: None,
        },
    )
}

fn engine_failure(err: &Error) -> Response {
    let best = match err {
        Error::NonConvergence { best } => Some(best.as_ref()),
        _ => None,
    };
    let status = if err.is_numerical() { StatusCode::UNPROCESSABLE_ENTITY } else { StatusCode::BAD_REQUEST };
    let detail = err.to_string();
    json_response(
        status,
        &Envelope {
            status: Status::Error,
            payload: None,
            error_code: Some(err.code()),
            error_detail: Some(&detail),
            best_so_far: best,
        },
    )
}

fn respond(result: stdpart_core::Result<String>) -> Response {
    match result {
        Ok(payload) => ok(payload),
        Err(e) => engine_failure(&e),
    }
}

fn schema_error(e: serde_json::Error) -> Response {
    failure(StatusCode::BAD_REQUEST, "schema", &e.to_string())
}

async fn fit(body: Bytes) -> Response {
    match serde_json::from_slice::<FitRequest>(&body) {
        Ok(request) => respond(fit_document(&request)),
        Err(e) => schema_error(e),
    }
}

async fn decide(query: Result<Query<DecideOptions>, QueryRejection>, body: Bytes) -> Response {
    let options = match query {
        Ok(Query(options)) => options,
        Err(e) => return failure(StatusCode::BAD_REQUEST, "schema", &e.body_text()),
    };
    match serde_json::from_slice::<Scenario>(&body) {
        Ok(scenario) => respond(decide_document(&scenario, &options)),
        Err(e) => schema_error(e),
    }
}

async fn case(Path(name): Path<String>) -> Response {
    match case_document(&name) {
        Some(result) => respond(result),
        None => failure(StatusCode::NOT_FOUND, "not_found", &format!("unknown case '{name}'")),
    }
}

async fn not_found() -> Response {
    failure(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

async fn method_not_allowed() -> Response {
    failure(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed on this endpoint")
}

fn api_routes() -> Router {
    Router::new()
        .route("/api/v1/fit", post(fit))
        .route("/api/v1/decide", post(decide))
        .route("/api/v1/case/{name}", get(case))
        .method_not_allowed_fallback(method_not_allowed)
}

pub fn router() -> Router {
    api_routes().fallback(not_found)
}

/// The API plus static files from `dir` for every path outside `/api/`.
pub fn router_with_assets(dir: impl AsRef<FsPath>) -> Router {
    let assets = ServeDir::new(dir.as_ref());
    api_routes().fallback(move |request: Request| {
        let assets = assets.clone();
        async move {
            if request.uri().path().starts_with("/api/") {
                return not_found().await;
            }
            match assets.oneshot(request).await {
                Ok(response) => response.into_response(),
                Err(never) => match never {},
            }
        }
    })
}

/// Serves `app` on `listener` until interrupted.
pub async fn serve(listener: TcpListener, app: Router) -> io::Result<()> {
    if let Ok(addr) = listener.local_addr() {
        tracing::info!(%addr, "listening");
    }
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

//! `POST /api/query` and `GET /api/health`.

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use odqa_core::service::{Engine, QueryRequest, ServiceError};
use serde_json::json;
use tower_http::cors::CorsLayer;

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/api/query", post(query))
        .route("/api/health", get(health))
        .layer(CorsLayer::permissive())
        .with_state(engine)
}

fn error_response(err: &ServiceError) -> Response {
    let status =
        StatusCode::from_u16(err.status_code()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    let mut body = json!({ "error": err.to_string() });
    if let ServiceError::Unavailable { stage, .. } = err {
        body["stage"] = json!(stage);
    }
    (status, Json(body)).into_response()
}

async fn query(
    State(engine): State<Arc<Engine>>,
    payload: Result<Json<QueryRequest>, JsonRejection>,
) -> Response {
    let req = match payload {
        Ok(Json(req)) => req,
        Err(rejection) => {
            return error_response(&ServiceError::BadRequest(rejection.body_text()));
        }
    };
    let result = tokio::task::spawn_blocking(move || engine.handle_query(&req)).await;
    match result {
        Ok(Ok(resp)) => Json(resp).into_response(),
        Ok(Err(err)) => {
            tracing::warn!(error = %err, "query failed");
            error_response(&err)
        }
        Err(join) => error_response(&ServiceError::Internal(join.to_string())),
    }
}

async fn health(State(engine): State<Arc<Engine>>) -> Response {
    let report = tokio::task::spawn_blocking(move || engine.health()).await;
    match report {
        Ok(report) => {
            let status = if report.status == "refusing" {
                StatusCode::SERVICE_UNAVAILABLE
            } else {
                StatusCode::OK
            };
            (status, Json(report)).into_response()
        }
        Err(join) => error_response(&ServiceError::Internal(join.to_string())),
    }
}

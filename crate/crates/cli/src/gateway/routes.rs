use std::sync::Arc;

use axum::extract::State;
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use peakq_core::domain::Placement;
use serde::{Deserialize, Serialize};

use super::state::{EmbedOutcome, GatewayState};

#[derive(Debug, Clone, Deserialize)]
pub struct EmbedRequest {
    pub id: Option<String>,
    /// Raw text; only its length matters. Tokens are approximated by
    /// whitespace-separated words.
    pub text: Option<String>,
    /// Explicit token count, preferred over `text` when both are present.
    pub token_length: Option<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbedResponse {
    pub id: String,
    pub placement: Placement,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub latency_s: Option<f64>,
}

pub fn build_router(state: Arc<GatewayState>) -> Router {
    Router::new()
        .route("/v1/embed", post(embed))
        .route("/v1/metrics", get(metrics))
        .route("/healthz", get(healthz))
        .with_state(state)
}

async fn embed(
    State(state): State<Arc<GatewayState>>,
    Json(request): Json<EmbedRequest>,
) -> Response {
    if !state.is_ready() {
        return (StatusCode::SERVICE_UNAVAILABLE, "plan not resolved yet").into_response();
    }
    let token_length = match request
        .token_length
        .or_else(|| request.text.as_deref().map(approximate_tokens))
    {
        Some(t) if t >= 1 => t,
        _ => {
            return (
                StatusCode::BAD_REQUEST,
                "provide token_length >= 1 or non-empty text",
            )
                .into_response()
        }
    };
    match state.handle_embed(request.id, token_length).await {
        Ok(EmbedOutcome::Admitted {
            id,
            placement,
            latency_s,
        }) => Json(EmbedResponse {
            id,
            placement,
            status: "ok".into(),
            latency_s: Some(latency_s),
        })
        .into_response(),
        Ok(EmbedOutcome::Busy { id, retry_after_s }) => {
            let mut headers = HeaderMap::new();
            headers.insert(header::RETRY_AFTER, retry_after_s.into());
            (
                StatusCode::TOO_MANY_REQUESTS,
                headers,
                Json(EmbedResponse {
                    id,
                    placement: Placement::Busy,
                    status: "busy".into(),
                    latency_s: None,
                }),
            )
                .into_response()
        }
        Err(e) => (StatusCode::INTERNAL_SERVER_ERROR, format!("{e:#}")).into_response(),
    }
}

fn approximate_tokens(text: &str) -> u32 {
    text.split_whitespace().count().max(1) as u32
}

async fn metrics(State(state): State<Arc<GatewayState>>) -> Response {
    Json(state.metrics()).into_response()
}

async fn healthz(State(state): State<Arc<GatewayState>>) -> Response {
    if state.is_ready() {
        (StatusCode::OK, "ok").into_response()
    } else {
        (StatusCode::SERVICE_UNAVAILABLE, "starting").into_response()
    }
}

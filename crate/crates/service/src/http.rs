//! JSON-over-HTTP front end.
//!
//! | method | path | body | reply |
//! |---|---|---|---|
//! | POST | `/datasets` | multipart form, CSV in the first file field | `{"dataset_id"}` |
//! | POST | `/sessions` | `{"dataset_id", "epsilon_total"}` | `{"session_id"}` |
//! | POST | `/sessions/{id}/verify` | a [`VerificationQuery`] | a `VerificationResult` |
//! | GET | `/sessions/{id}/budget` | | a `BudgetStatus` |

use std::sync::Arc;

use axum::extract::{Multipart, Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::ServiceError;
use crate::query::VerificationQuery;
use crate::service::VerificationService;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::UnknownDataset(_) | ServiceError::UnknownSession(_) => {
                StatusCode::NOT_FOUND
            }
            ServiceError::BudgetExhausted { .. } => StatusCode::CONFLICT,
            ServiceError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        (status, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NewSession {
    pub dataset_id: String,
    pub epsilon_total: f64,
}

pub fn router(service: Arc<VerificationService>) -> Router {
    Router::new()
        .route("/datasets", post(upload))
        .route("/sessions", post(open_session))
        .route("/sessions/{id}/verify", post(verify))
        .route("/sessions/{id}/budget", get(budget))
        .with_state(service)
}

async fn upload(
    State(service): State<Arc<VerificationService>>,
    mut form: Multipart,
) -> Result<Response, ServiceError> {
    let bad = |msg: String| ServiceError::InvalidQuery(msg);
    while let Some(field) = form.next_field().await.map_err(|e| bad(e.to_string()))? {
        if field.file_name().is_some() || field.name() == Some("file") {
            let bytes = field.bytes().await.map_err(|e| bad(e.to_string()))?;
            let id = service.add_dataset(&bytes)?;
            return Ok((StatusCode::CREATED, Json(json!({ "dataset_id": id }))).into_response());
        }
    }
    Err(bad("no CSV file in the upload".into()))
}

async fn open_session(
    State(service): State<Arc<VerificationService>>,
    Json(body): Json<NewSession>,
) -> Result<Response, ServiceError> {
    let id = service.open_session(&body.dataset_id, body.epsilon_total)?;
    Ok((StatusCode::CREATED, Json(json!({ "session_id": id }))).into_response())
}

async fn verify(
    State(service): State<Arc<VerificationService>>,
    Path(id): Path<String>,
    Json(query): Json<VerificationQuery>,
) -> Result<Response, ServiceError> {
    // releases are CPU bound; keep them off the async workers
    let result = tokio::task::spawn_blocking(move || service.submit_query(&id, &query))
        .await
        .map_err(|e| ServiceError::Io(std::io::Error::other(e)))??;
    Ok(Json(result).into_response())
}

async fn budget(
    State(service): State<Arc<VerificationService>>,
    Path(id): Path<String>,
) -> Result<Response, ServiceError> {
    Ok(Json(service.budget_status(&id)?).into_response())
}

/// Serves until the process is stopped.
pub async fn serve(service: Arc<VerificationService>, bind: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    axum::serve(listener, router(service)).await
}

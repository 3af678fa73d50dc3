use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("session {0} not found")]
    UnknownSession(String),
    #[error("no feasible elite in cell {0:?}")]
    NoElite([usize; 2]),
    #[error("invalid document: {0}")]
    InvalidDocument(String),
    #[error("{0}")]
    InvalidRequest(String),
    #[error("session worker stopped")]
    WorkerGone,
    #[error("state file {path}: {message}")]
    Persistence { path: String, message: String },
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownSession(_) => "unknown_session",
            ServiceError::NoElite(_) => "no_elite",
            ServiceError::InvalidDocument(_) => "invalid_document",
            ServiceError::InvalidRequest(_) => "invalid_request",
            ServiceError::WorkerGone => "worker_gone",
            ServiceError::Persistence { .. } => "persistence",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownSession(_) | ServiceError::NoElite(_) => StatusCode::NOT_FOUND,
            ServiceError::InvalidDocument(_) | ServiceError::InvalidRequest(_) => StatusCode::BAD_REQUEST,
            ServiceError::WorkerGone | ServiceError::Persistence { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Serialize)]
struct ErrorBody {
    error: &'static str,
    message: String,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: self.code(),
            message: self.to_string(),
        };
        (self.status(), Json(body)).into_response()
    }
}

use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use capstone_core::{Error, ErrorClass};
use serde::Serialize;
use serde_json::Value;

/// JSON error body. Every error maps to one status class: 4xx for client
/// mistakes, 404 for missing entities, 409 for gate and version conflicts,
/// 5xx for server faults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: String,
    pub message: String,
    pub details: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code: code.to_owned(),
            message: message.into(),
            details: Value::Null,
        }
    }

    pub fn version_required() -> Self {
        ApiError::new(
            StatusCode::PRECONDITION_REQUIRED,
            "version_required",
            format!("mutations must send the {} header", crate::VERSION_HEADER),
        )
    }

    pub fn bad_header(value: &HeaderValue) -> Self {
        ApiError::new(
            StatusCode::BAD_REQUEST,
            "bad_version_header",
            format!("version header {value:?} is not an integer"),
        )
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match e.class() {
            ErrorClass::Client => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorClass::NotFound => StatusCode::NOT_FOUND,
            ErrorClass::Conflict => StatusCode::CONFLICT,
            ErrorClass::Server => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError {
            status,
            code: e.code().to_owned(),
            message: e.to_string(),
            details: e.details(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::to_string(&self).unwrap_or_else(|_| "{}".into());
        (
            self.status,
            [(header::CONTENT_TYPE, "application/json")],
            body,
        )
            .into_response()
    }
}

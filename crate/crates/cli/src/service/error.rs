use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use gcs_core::imaging::PipelineError;
use gcs_core::link::LinkError;
use gcs_core::mission::PlanError;
use gcs_core::store::StoreError;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorCode {
    NotConnected,
    BadRequest,
    NotFound,
    NoFrameYet,
    DroneError,
    Timeout,
    Internal,
}

impl ErrorCode {
    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::NotConnected | ErrorCode::NoFrameYet => StatusCode::CONFLICT,
            ErrorCode::BadRequest => StatusCode::BAD_REQUEST,
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::DroneError => StatusCode::BAD_GATEWAY,
            ErrorCode::Timeout => StatusCode::GATEWAY_TIMEOUT,
            ErrorCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

/// Body of every failed request.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub detail: String,
    /// 1-based pipeline step at fault, for pipeline errors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
}

impl ApiError {
    pub fn new(code: ErrorCode, detail: impl Into<String>) -> Self {
        Self {
            code,
            detail: detail.into(),
            step: None,
        }
    }

    pub fn bad_request(detail: impl Into<String>) -> Self {
        Self::new(ErrorCode::BadRequest, detail)
    }

    pub fn not_connected() -> Self {
        Self::new(ErrorCode::NotConnected, "no drone session; POST /connect first")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), Json(self)).into_response()
    }
}

impl From<LinkError> for ApiError {
    fn from(e: LinkError) -> Self {
        let code = match &e {
            LinkError::ConnectTimeout { .. } | LinkError::ReplyTimeout { .. } => ErrorCode::Timeout,
            LinkError::DroneError { .. } => ErrorCode::DroneError,
            LinkError::Protocol(_) | LinkError::InvalidEndpoint(_) | LinkError::NotInSdkMode(_) => {
                ErrorCode::BadRequest
            }
            LinkError::BindFailure { .. } | LinkError::Io(_) => ErrorCode::Internal,
        };
        Self::new(code, e.to_string())
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let code = match &e {
            StoreError::NoFrameYet => ErrorCode::NoFrameYet,
            StoreError::NotFound(_) => ErrorCode::NotFound,
            _ => ErrorCode::Internal,
        };
        Self::new(code, e.to_string())
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        Self {
            code: ErrorCode::BadRequest,
            detail: e.to_string(),
            step: Some(e.step()),
        }
    }
}

impl From<PlanError> for ApiError {
    fn from(e: PlanError) -> Self {
        Self::bad_request(e.to_string())
    }
}

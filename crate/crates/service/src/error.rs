use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

/// Error body returned by every endpoint: `{code, message, detail}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
    pub detail: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("unknown session `{0}`")]
    UnknownSession(String),

    #[error("invalid setting")]
    InvalidSetting(String),

    #[error("invalid color")]
    InvalidColor(String),

    #[error("invalid variant")]
    InvalidVariant(String),

    #[error("malformed request body")]
    BadBody(String),

    #[error("internal error")]
    Internal(String),
}

impl ApiError {
    fn status(&self) -> StatusCode {
        match self {
            ApiError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        }
    }

    fn code(&self) -> &'static str {
        match self {
            ApiError::UnknownSession(_) => "unknown_session",
            ApiError::InvalidSetting(_) => "invalid_setting",
            ApiError::InvalidColor(_) => "invalid_color",
            ApiError::InvalidVariant(_) => "invalid_variant",
            ApiError::BadBody(_) => "bad_request",
            ApiError::Internal(_) => "internal",
        }
    }

    fn detail(&self) -> String {
        match self {
            ApiError::UnknownSession(s)
            | ApiError::InvalidSetting(s)
            | ApiError::InvalidColor(s)
            | ApiError::InvalidVariant(s)
            | ApiError::BadBody(s)
            | ApiError::Internal(s) => s.clone(),
        }
    }
}

impl From<magicsq::Error> for ApiError {
    fn from(e: magicsq::Error) -> Self {
        match e {
            magicsq::Error::InvalidSetting(t) => ApiError::InvalidSetting(t),
            magicsq::Error::InvalidColor(t) => ApiError::InvalidColor(t),
            magicsq::Error::InvalidVariant(t) => ApiError::InvalidVariant(t),
            other => ApiError::Internal(other.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if let ApiError::Internal(msg) = &self {
            tracing::error!("{msg}");
        }
        let body = ErrorBody {
            code: self.code(),
            message: self.to_string(),
            detail: Some(self.detail()),
        };
        (self.status(), Json(body)).into_response()
    }
}

//! The single error shape every failing request returns.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use patternquest_core::economy::EconomyError;
use patternquest_core::persistence::StoreError;
use patternquest_core::GameError;
use serde::{Deserialize, Serialize};

/// Body of every 4xx/5xx response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: String,
    pub http_status: u16,
    pub message: String,
}

impl ApiError {
    pub fn new(code: &str, http_status: u16, message: impl Into<String>) -> Self {
        Self {
            code: code.to_string(),
            http_status,
            message: message.into(),
        }
    }

    pub fn invalid_request(message: impl Into<String>) -> Self {
        Self::new("InvalidRequest", 400, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new("NotFound", 404, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new("Internal", 500, message)
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({}): {}", self.code, self.http_status, self.message)
    }
}

impl std::error::Error for ApiError {}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.http_status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

impl From<GameError> for ApiError {
    fn from(e: GameError) -> Self {
        let message = e.to_string();
        match e {
            GameError::IllegalPhase { .. } => Self::new("IllegalPhase", 409, message),
            GameError::ChoiceOutOfRange(_) => Self::new("ChoiceOutOfRange", 400, message),
        }
    }
}

impl From<EconomyError> for ApiError {
    fn from(e: EconomyError) -> Self {
        let message = e.to_string();
        match e {
            EconomyError::InsufficientPoints { .. } => Self::new("InsufficientPoints", 422, message),
            EconomyError::AlreadyOwned(_) => Self::new("AlreadyOwned", 409, message),
            EconomyError::NotOwned(_) => Self::new("NotOwned", 422, message),
            EconomyError::UnknownAvatar(_) => Self::new("UnknownAvatar", 404, message),
            EconomyError::EnergyDepleted { .. } => Self::new("EnergyDepleted", 422, message),
            EconomyError::InvalidConfig(_) => Self::new("InvalidConfig", 500, message),
            EconomyError::InvalidCatalog(_) => Self::new("InvalidCatalog", 500, message),
            EconomyError::Load(_) => Self::new("ConfigLoad", 500, message),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let message = e.to_string();
        match e {
            StoreError::NotFound(_) => Self::new("NotFound", 404, message),
            StoreError::DuplicateName(_) => Self::new("DuplicateName", 409, message),
            StoreError::InvalidName(_) => Self::new("InvalidName", 400, message),
            StoreError::InvalidSettings(_) => Self::new("InvalidSettings", 400, message),
            StoreError::LoadCorrupt { .. } => Self::new("LoadCorrupt", 500, message),
            StoreError::UnsupportedVersion { .. } => Self::new("UnsupportedVersion", 500, message),
            StoreError::DataDirUnwritable { .. } => Self::new("DataDirUnwritable", 500, message),
            StoreError::Io { .. } => Self::new("Io", 500, message),
        }
    }
}

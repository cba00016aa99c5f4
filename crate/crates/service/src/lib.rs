//! HTTP/JSON API over the magic-square experiment engine.
//!
//! Sessions live in memory and vanish on restart unless a journal directory
//! is configured, in which case each session appends one JSON record per line
//! to `<journal_dir>/<session id>.jsonl`.

pub mod api;
pub mod error;
pub mod session;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::http::HeaderValue;
use axum::Router;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

pub use api::{routes, AppState};
pub use error::{ApiError, ErrorBody};

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    pub journal_dir: Option<PathBuf>,
    /// Origin allowed by CORS; any origin when unset.
    pub cors_origin: Option<String>,
}

pub fn app(config: &ServiceConfig) -> Router {
    let state = Arc::new(AppState {
        sessions: session::SessionStore::new(config.journal_dir.clone()),
    });
    let origin = match config
        .cors_origin
        .as_deref()
        .and_then(|o| HeaderValue::from_str(o).ok())
    {
        Some(o) => AllowOrigin::exact(o),
        None => AllowOrigin::any(),
    };
    let cors = CorsLayer::new()
        .allow_origin(origin)
        .allow_methods(Any)
        .allow_headers(Any);
    routes(state).layer(cors)
}

/// Binds `addr` and serves until the task is cancelled.
pub async fn serve(addr: SocketAddr, config: ServiceConfig) -> std::io::Result<()> {
    if let Some(dir) = &config.journal_dir {
        tokio::fs::create_dir_all(dir).await?;
    }
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, app(&config)).await
}

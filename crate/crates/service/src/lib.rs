//! HTTP front end for the timeline pipeline.
//!
//! | route              | body in        | 200 body                 |
//! |--------------------|----------------|--------------------------|
//! | `POST /api/timeline` | annotated XML | `heart-view/1` JSON     |
//! | `POST /api/render`   | annotated XML | SVG                     |
//! | `GET /api/health`    |               | `ok`                    |
//! | `GET /`              |               | webapp bundle, if found |
//!
//! Query parameters `dct`, `spacing` and `showEmptyDct` override the startup
//! configuration for one request. Documents with errors get 400 and
//! `{"diagnostics": [...]}`; bodies over the size cap get 413. Nothing is
//! stored between requests.

use std::env;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{DefaultBodyLimit, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use heart_core::layout::{Spacing, Theme, ThemeError};
use heart_core::temporal::{PatternTable, PatternTableError};
use heart_core::{Diagnostic, Engine, RequestOptions};
use serde::Serialize;
use tokio::net::TcpListener;
use tower_http::services::ServeDir;
use tower_http::trace::TraceLayer;

pub const DEFAULT_LISTEN: &str = "127.0.0.1:8680";
pub const DEFAULT_MAX_BODY: usize = 1 << 20;

/// Read once at startup.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub listen: SocketAddr,
    pub spacing: Spacing,
    pub locale_table: Option<PathBuf>,
    pub theme: Option<PathBuf>,
    pub show_empty_dct: bool,
    pub max_body_bytes: usize,
    pub webapp_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            listen: DEFAULT_LISTEN.parse().expect("valid default address"),
            spacing: Spacing::Ordinal,
            locale_table: None,
            theme: None,
            show_empty_dct: true,
            max_body_bytes: DEFAULT_MAX_BODY,
            webapp_dir: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{var}: {message}")]
    Env { var: &'static str, message: String },
    #[error("locale table: {0}")]
    Locale(#[from] PatternTableError),
    #[error("theme: {0}")]
    Theme(#[from] ThemeError),
}

impl ServiceConfig {
    /// Defaults overridden by `HEART_LISTEN`, `HEART_LOCALE_TABLE`,
    /// `HEART_SPACING`, `HEART_SHOW_EMPTY_DCT`, `HEART_MAX_BODY` and
    /// `HEART_WEBAPP_DIR`.
    pub fn from_env() -> Result<Self, ConfigError> {
        let mut config = Self::default();
        if let Some(v) = var("HEART_LISTEN") {
            config.listen = parse_var("HEART_LISTEN", &v)?;
        }
        if let Some(v) = var("HEART_LOCALE_TABLE") {
            config.locale_table = Some(v.into());
        }
        if let Some(v) = var("HEART_SPACING") {
            config.spacing = parse_var("HEART_SPACING", &v)?;
        }
        if let Some(v) = var("HEART_SHOW_EMPTY_DCT") {
            config.show_empty_dct = parse_var("HEART_SHOW_EMPTY_DCT", &v)?;
        }
        if let Some(v) = var("HEART_MAX_BODY") {
            config.max_body_bytes = parse_var("HEART_MAX_BODY", &v)?;
        }
        if let Some(v) = var("HEART_WEBAPP_DIR") {
            config.webapp_dir = Some(v.into());
        }
        Ok(config)
    }

    pub fn engine(&self) -> Result<Engine, ConfigError> {
        let mut engine = Engine::default();
        if let Some(path) = &self.locale_table {
            engine.patterns = PatternTable::load(path)?;
        }
        if let Some(path) = &self.theme {
            engine.theme = Theme::load(path)?;
        }
        engine.layout.spacing = self.spacing;
        engine.layout.show_empty_dct = self.show_empty_dct;
        Ok(engine)
    }
}

fn var(name: &str) -> Option<String> {
    env::var(name).ok().filter(|v| !v.trim().is_empty())
}

fn parse_var<T: std::str::FromStr>(var: &'static str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| ConfigError::Env {
        var,
        message: e.to_string(),
    })
}

#[derive(Serialize)]
struct DiagnosticsBody {
    diagnostics: Vec<Diagnostic>,
}

fn rejected(diagnostics: Vec<Diagnostic>) -> Response {
    (StatusCode::BAD_REQUEST, Json(DiagnosticsBody { diagnostics })).into_response()
}

#[derive(Clone, Copy)]
enum Output {
    View,
    Svg,
}

async fn run_pipeline(
    engine: Arc<Engine>,
    query: Result<Query<RequestOptions>, QueryRejection>,
    body: Bytes,
    output: Output,
) -> Response {
    let options = match query {
        Ok(Query(options)) => options,
        Err(err) => return rejected(vec![Diagnostic::error("request.query", err.body_text())]),
    };
    let xml = match String::from_utf8(body.to_vec()) {
        Ok(xml) => xml,
        Err(err) => {
            return rejected(vec![Diagnostic::error(
                "request.encoding",
                format!("body is not UTF-8: {err}"),
            )])
        }
    };
    let job = tokio::task::spawn_blocking(move || {
        let engine = engine.with_options(&options);
        match output {
            Output::View => engine.view_json(&xml, options.dct),
            Output::Svg => engine.svg(&xml, options.dct),
        }
    });
    match job.await {
        Ok(Ok(text)) => {
            let content_type = match output {
                Output::View => "application/json",
                Output::Svg => "image/svg+xml",
            };
            ([(header::CONTENT_TYPE, content_type)], text).into_response()
        }
        Ok(Err(diagnostics)) => rejected(diagnostics),
        Err(err) => {
            tracing::error!("pipeline task failed: {err}");
            (StatusCode::INTERNAL_SERVER_ERROR, "internal error").into_response()
        }
    }
}

async fn timeline(
    State(engine): State<Arc<Engine>>,
    query: Result<Query<RequestOptions>, QueryRejection>,
    body: Bytes,
) -> Response {
    run_pipeline(engine, query, body, Output::View).await
}

async fn render(
    State(engine): State<Arc<Engine>>,
    query: Result<Query<RequestOptions>, QueryRejection>,
    body: Bytes,
) -> Response {
    run_pipeline(engine, query, body, Output::Svg).await
}

async fn health() -> &'static str {
    "ok"
}

async fn no_webapp() -> (StatusCode, &'static str) {
    (
        StatusCode::NOT_FOUND,
        "no webapp bundle installed; the API lives under /api\n",
    )
}

pub fn router(engine: Engine, config: &ServiceConfig) -> Router {
    let api = Router::new()
        .route("/api/timeline", post(timeline))
        .route("/api/render", post(render))
        .route("/api/health", get(health))
        .layer(DefaultBodyLimit::max(config.max_body_bytes))
        .with_state(Arc::new(engine));
    let app = match config.webapp_dir.as_ref().filter(|d| d.join("index.html").is_file()) {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(no_webapp)),
    };
    app.layer(TraceLayer::new_for_http())
}

/// Bind `config.listen` and serve in a background task. Returns the bound
/// address, which differs from the configured one when port 0 was asked for.
pub async fn spawn(config: &ServiceConfig) -> Result<SocketAddr, ServeError> {
    let app = router(config.engine()?, config);
    let listener = TcpListener::bind(config.listen).await?;
    let addr = listener.local_addr()?;
    tokio::spawn(async move {
        if let Err(err) = axum::serve(listener, app).await {
            tracing::error!("server stopped: {err}");
        }
    });
    Ok(addr)
}

/// Serve until Ctrl-C.
pub async fn serve(config: &ServiceConfig) -> Result<(), ServeError> {
    let app = router(config.engine()?, config);
    let listener = TcpListener::bind(config.listen).await?;
    tracing::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn engine_follows_config() {
        let config = ServiceConfig {
            spacing: Spacing::Proportional,
            show_empty_dct: false,
            ..ServiceConfig::default()
        };
        let engine = config.engine().unwrap();
        assert_eq!(engine.layout.spacing, Spacing::Proportional);
        assert!(!engine.layout.show_empty_dct);
    }

    #[test]
    fn missing_locale_table_is_a_config_error() {
        let config = ServiceConfig {
            locale_table: Some("/nonexistent/en.rules".into()),
            ..ServiceConfig::default()
        };
        assert!(matches!(config.engine(), Err(ConfigError::Locale(_))));
    }
}

//! Async client for `heart-service`.

use heart_core::{Diagnostic, RequestOptions};
use reqwest::StatusCode;
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Http(#[from] reqwest::Error),
    /// The service refused the document (400).
    #[error("document rejected with {} diagnostic(s)", .0.len())]
    Rejected(Vec<Diagnostic>),
    #[error("unexpected status {status}: {body}")]
    Status { status: StatusCode, body: String },
}

#[derive(Deserialize)]
struct DiagnosticsBody {
    diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:8680`.
    pub fn new(base: impl Into<String>) -> Self {
        Self {
            base: base.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    /// `heart-view/1` JSON, exactly as sent by the service.
    pub async fn timeline(&self, xml: &str, options: &RequestOptions) -> Result<String, ClientError> {
        self.post("/api/timeline", xml, options).await
    }

    pub async fn render(&self, xml: &str, options: &RequestOptions) -> Result<String, ClientError> {
        self.post("/api/render", xml, options).await
    }

    pub async fn health(&self) -> Result<bool, ClientError> {
        let resp = self.http.get(format!("{}/api/health", self.base)).send().await?;
        Ok(resp.status().is_success() && resp.text().await? == "ok")
    }

    async fn post(&self, path: &str, xml: &str, options: &RequestOptions) -> Result<String, ClientError> {
        let resp = self
            .http
            .post(format!("{}{path}", self.base))
            .query(options)
            .header(reqwest::header::CONTENT_TYPE, "application/xml")
            .body(xml.to_string())
            .send()
            .await?;
        let status = resp.status();
        let body = resp.text().await?;
        if status.is_success() {
            return Ok(body);
        }
        if status == StatusCode::BAD_REQUEST {
            if let Ok(parsed) = serde_json::from_str::<DiagnosticsBody>(&body) {
                return Err(ClientError::Rejected(parsed.diagnostics));
            }
        }
        Err(ClientError::Status { status, body })
    }
}

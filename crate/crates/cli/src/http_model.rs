//! HTTP model client for `--model http:<endpoint>`.
//!
//! Wire contract: POST a JSON body `{"system": ..., "user": ...}` to the
//! endpoint; the reply is JSON `{"completion": "..."}`. A bearer token
//! is sent when `WORKGRAPH_MODEL_TOKEN` is set. The caller-supplied
//! deadline becomes the whole-call timeout.

use std::time::Duration;

use workgraph_core::classify::{ModelClient, ModelError};

pub const TOKEN_ENV: &str = "WORKGRAPH_MODEL_TOKEN";

pub struct HttpModel {
    endpoint: String,
    token: Option<String>,
}

impl HttpModel {
    pub fn new(endpoint: impl Into<String>) -> Self {
        HttpModel {
            endpoint: endpoint.into(),
            token: std::env::var(TOKEN_ENV).ok(),
        }
    }
}

impl ModelClient for HttpModel {
    fn complete(
        &self,
        system_prompt: &str,
        user_prompt: &str,
        deadline: Duration,
    ) -> Result<String, ModelError> {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(deadline))
            .build();
        let agent: ureq::Agent = config.into();
        let mut request = agent.post(&self.endpoint);
        if let Some(token) = &self.token {
            request = request.header("Authorization", format!("Bearer {token}"));
        }
        let body = serde_json::json!({ "system": system_prompt, "user": user_prompt });
        let mut response = request.send_json(&body).map_err(|e| match e {
            ureq::Error::Timeout(_) => ModelError::Timeout,
            other => ModelError::Transport(other.to_string()),
        })?;
        let value: serde_json::Value = response
            .body_mut()
            .read_json()
            .map_err(|e| ModelError::Transport(format!("bad response body: {e}")))?;
        value
            .get("completion")
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .ok_or_else(|| {
                ModelError::Transport("response JSON lacks a string \"completion\" field".into())
            })
    }
}

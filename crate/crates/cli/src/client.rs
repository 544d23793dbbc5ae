use std::time::Duration;

use reqwest::blocking::{Client, RequestBuilder};
use reqwest::Method;
use serde::de::DeserializeOwned;
use serde_json::Value;

use crate::error::CliError;

pub struct ApiClient {
    base: String,
    http: Client,
    token: Option<String>,
}

impl ApiClient {
    pub fn new(base: &str, token: Option<String>) -> Result<Self, CliError> {
        let http = Client::builder()
            .timeout(Duration::from_secs(300))
            .build()
            .map_err(|e| CliError::Transport(e.to_string()))?;
        Ok(ApiClient { base: base.trim_end_matches('/').to_owned(), http, token })
    }

    fn builder(&self, method: Method, path: &str, auth: bool) -> Result<RequestBuilder, CliError> {
        let mut req = self.http.request(method, format!("{}{path}", self.base));
        if auth {
            let token = self
                .token
                .as_deref()
                .ok_or_else(|| CliError::Api {
                    status: 401,
                    code: "unauthenticated".into(),
                    message: "not logged in; run `ringvault login` first".into(),
                })?;
            req = req.bearer_auth(token);
        }
        Ok(req)
    }

    fn send<T: DeserializeOwned>(&self, req: RequestBuilder) -> Result<T, CliError> {
        let resp = req.send().map_err(|e| CliError::Transport(e.to_string()))?;
        let status = resp.status();
        let bytes = resp.bytes().map_err(|e| CliError::Transport(e.to_string()))?;
        if !status.is_success() {
            let body: Value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
            let field = |k: &str| body.get(k).and_then(Value::as_str).map(str::to_owned);
            return Err(CliError::Api {
                status: status.as_u16(),
                code: field("error").unwrap_or_else(|| "http_error".into()),
                message: field("message").unwrap_or_else(|| String::from_utf8_lossy(&bytes).into_owned()),
            });
        }
        serde_json::from_slice(&bytes).map_err(|e| CliError::Transport(format!("unexpected response: {e}")))
    }

    pub fn get<T: DeserializeOwned>(&self, path: &str, auth: bool) -> Result<T, CliError> {
        self.send(self.builder(Method::GET, path, auth)?)
    }

    pub fn post<T: DeserializeOwned>(&self, path: &str, body: Option<&Value>, auth: bool) -> Result<T, CliError> {
        let mut req = self.builder(Method::POST, path, auth)?;
        if let Some(b) = body {
            req = req.json(b);
        }
        self.send(req)
    }
}

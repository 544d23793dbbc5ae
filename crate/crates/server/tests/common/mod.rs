#![allow(dead_code)]

use std::sync::{Arc, Mutex};

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use ringvault_core::clock::ManualClock;
use ringvault_core::otp::MemoryTransport;
use ringvault_server::service::RegisterRequest;
use ringvault_server::{router, ServerConfig, Service};
use serde_json::{json, Value};
use tempfile::TempDir;
use tower::ServiceExt;

pub const START: u64 = 1_750_000_000;
pub const SECRET: [u32; 3] = [3, 12, 20];

pub fn test_config(dir: &std::path::Path) -> ServerConfig {
    ServerConfig {
        data_dir: dir.to_path_buf(),
        password_iterations: 1_000,
        ..ServerConfig::default()
    }
}

pub fn register_request(username: &str, password: &str) -> RegisterRequest {
    RegisterRequest {
        username: username.into(),
        password: password.into(),
        email: format!("{username}@example.org"),
        mobile: "+15550100".into(),
        graphical: SECRET.to_vec(),
    }
}

pub struct Harness {
    pub dir: TempDir,
    pub clock: Arc<ManualClock>,
    pub transport: Arc<MemoryTransport>,
    pub service: Arc<Service>,
    pub router: Router,
    /// Every response body seen so far.
    pub transcript: Mutex<Vec<String>>,
}

impl Harness {
    pub fn new() -> Self {
        Self::with_config(|_| {})
    }

    pub fn with_config(tweak: impl FnOnce(&mut ServerConfig)) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let mut config = test_config(dir.path());
        tweak(&mut config);
        let clock = Arc::new(ManualClock::new(START));
        let transport = Arc::new(MemoryTransport::new());
        let service = Arc::new(Service::with_parts(config, clock.clone(), transport.clone()).unwrap());
        let router = router(service.clone());
        Harness { dir, clock, transport, service, router, transcript: Mutex::new(Vec::new()) }
    }

    pub async fn call(&self, method: Method, uri: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, Value) {
        let mut req = Request::builder().method(method).uri(uri);
        if let Some(t) = token {
            req = req.header(header::AUTHORIZATION, format!("Bearer {t}"));
        }
        let req = match body {
            Some(b) => req.header(header::CONTENT_TYPE, "application/json").body(Body::from(b.to_string())),
            None => req.body(Body::empty()),
        }
        .unwrap();
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        self.transcript.lock().unwrap().push(String::from_utf8_lossy(&bytes).into_owned());
        let value = serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()));
        (status, value)
    }

    pub async fn signup(&self, username: &str, password: &str) -> String {
        let (status, _) = self
            .call(
                Method::POST,
                "/register",
                None,
                Some(json!({
                    "username": username,
                    "password": password,
                    "email": format!("{username}@example.org"),
                    "mobile": "+15550100",
                    "graphical": SECRET,
                })),
            )
            .await;
        assert_eq!(status, StatusCode::OK);
        let (status, body) =
            self.call(Method::POST, "/login", None, Some(json!({"username": username, "password": password}))).await;
        assert_eq!(status, StatusCode::OK);
        body["token"].as_str().unwrap().to_owned()
    }

    pub async fn upload(&self, token: &str, payload: &[u8], cia: (i64, i64, i64)) -> Value {
        use base64::Engine;
        let (status, body) = self
            .call(
                Method::POST,
                "/objects",
                Some(token),
                Some(json!({
                    "name": "doc.bin",
                    "payload_b64": base64::engine::general_purpose::STANDARD.encode(payload),
                    "confidentiality": cia.0,
                    "integrity": cia.1,
                    "availability": cia.2,
                })),
            )
            .await;
        assert_eq!(status, StatusCode::OK, "{body}");
        body
    }

    /// The answer a legitimate user would give for the challenge just issued.
    pub fn correct_answer(&self, challenge: &Value, password: &str) -> Value {
        match challenge["kind"].as_str().unwrap() {
            "otp" => json!({"otp": self.transport.last_code().unwrap().as_str()}),
            "graphical" => json!({"choices": SECRET}),
            "password_reentry" => json!({"password": password}),
            other => panic!("unexpected kind {other}"),
        }
    }
}

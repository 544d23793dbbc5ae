#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use axum::body::{to_bytes, Body};
use axum::extract::{Request, State};
use axum::middleware::{self, Next};
use axum::response::Response;
use ringvault_core::clock::{Clock, SystemClock};
use ringvault_core::otp::OutboxTransport;
use ringvault_server::{router, ServerConfig, Service};
use tempfile::TempDir;

/// One HTTP exchange as seen on the wire.
#[derive(Debug, Clone)]
pub struct Exchange {
    pub method: String,
    pub uri: String,
    pub request_headers: String,
    pub request_body: Vec<u8>,
    pub status: u16,
    pub response_body: Vec<u8>,
}

type Log = Arc<Mutex<Vec<Exchange>>>;

async fn capture(State(log): State<Log>, req: Request, next: Next) -> Response {
    let (parts, body) = req.into_parts();
    let request_body = to_bytes(body, usize::MAX).await.unwrap_or_default();
    let request_headers = parts
        .headers
        .iter()
        .map(|(k, v)| format!("{k}: {}\n", String::from_utf8_lossy(v.as_bytes())))
        .collect();
    let method = parts.method.to_string();
    let uri = parts.uri.to_string();
    let resp = next.run(Request::from_parts(parts, Body::from(request_body.clone()))).await;
    let (rparts, rbody) = resp.into_parts();
    let response_body = to_bytes(rbody, usize::MAX).await.unwrap_or_default();
    log.lock().unwrap().push(Exchange {
        method,
        uri,
        request_headers,
        request_body: request_body.to_vec(),
        status: rparts.status.as_u16(),
        response_body: response_body.to_vec(),
    });
    Response::from_parts(rparts, Body::from(response_body))
}

pub struct TestServer {
    pub dir: TempDir,
    pub addr: SocketAddr,
    pub url: String,
    pub outbox: PathBuf,
    pub service: Arc<Service>,
    pub log: Log,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl TestServer {
    pub fn start() -> Self {
        Self::start_with(|c| c.password_iterations = 1_000)
    }

    pub fn start_with(tweak: impl FnOnce(&mut ServerConfig)) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let outbox = dir.path().join("outbox.txt");
        let mut config = ServerConfig {
            data_dir: dir.path().join("data"),
            outbox_path: Some(outbox.clone()),
            ..ServerConfig::default()
        };
        tweak(&mut config);
        let clock: Arc<dyn Clock> = Arc::new(SystemClock);
        let transport = Arc::new(OutboxTransport::new(&outbox, clock.clone()));
        let service = Arc::new(Service::with_parts(config, clock, transport).unwrap());
        let log: Log = Arc::default();

        let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build().unwrap();
        let listener = runtime.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
        let addr = listener.local_addr().unwrap();
        let app = router(service.clone()).layer(middleware::from_fn_with_state(log.clone(), capture));
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let thread = std::thread::spawn(move || {
            runtime.block_on(async move {
                axum::serve(listener, app)
                    .with_graceful_shutdown(async move {
                        let _ = rx.await;
                    })
                    .await
                    .unwrap();
            });
        });
        TestServer {
            url: format!("http://{addr}"),
            addr,
            outbox,
            service,
            log,
            dir,
            shutdown: Some(tx),
            thread: Some(thread),
        }
    }

    pub fn exchanges(&self) -> Vec<Exchange> {
        self.log.lock().unwrap().clone()
    }

    pub fn latest_code(&self, mobile: &str) -> String {
        OutboxTransport::latest_code_for(&self.outbox, mobile).unwrap().unwrap().as_str().to_owned()
    }

    pub fn data_dir(&self) -> PathBuf {
        self.dir.path().join("data")
    }
}

impl Drop for TestServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

/// Runs the `ringvault` binary with an isolated config directory.
pub struct CliRunner {
    pub home: TempDir,
    pub server: String,
}

impl CliRunner {
    pub fn new(server: &TestServer) -> Self {
        let home = tempfile::tempdir().unwrap();
        std::fs::write(
            home.path().join("config.toml"),
            format!("server_url = \"{}\"\ntoken_path = \"session\"\n", server.url),
        )
        .unwrap();
        CliRunner { home, server: server.url.clone() }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.home.path().join(name)
    }

    pub fn run(&self, args: &[&str], envs: &[(&str, &str)]) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_ringvault"));
        cmd.args(args)
            .env_clear()
            .env("RINGVAULT_CONFIG", self.home.path().join("config.toml"))
            .env("HOME", self.home.path())
            .current_dir(self.home.path());
        for (k, v) in envs {
            cmd.env(k, v);
        }
        cmd.output().unwrap()
    }
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn contains(haystack: &[u8], needle: &[u8]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

pub fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    if let Ok(rd) = std::fs::read_dir(dir) {
        for entry in rd.flatten() {
            let path = entry.path();
            if path.is_dir() {
                out.extend(walk(&path));
            } else {
                out.push(path);
            }
        }
    }
    out
}

//! RingVault storage service.
//!
//! Objects are classified into protection rings on upload and released only
//! after the ring's challenge is answered: password re-entry for ring 3, a
//! graphical password for ring 2, and an SMS one-time password for ring 1.

pub mod api;
pub mod audit;
pub mod config;
pub mod password;
pub mod service;
pub mod store;

use std::future::Future;
use std::net::SocketAddr;
use std::sync::Arc;

use tokio::net::TcpListener;

pub use api::router;
pub use config::ServerConfig;
pub use service::Service;

/// Binds and serves until `shutdown` resolves.
pub async fn serve(
    service: Arc<Service>,
    listen: SocketAddr,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    let listener = TcpListener::bind(listen).await?;
    serve_on(service, listener, shutdown).await
}

pub async fn serve_on(
    service: Arc<Service>,
    listener: TcpListener,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(service)).with_graceful_shutdown(shutdown).await
}

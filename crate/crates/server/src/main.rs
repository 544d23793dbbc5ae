use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use ringvault_server::{serve, ServerConfig, Service};
use tracing_subscriber::EnvFilter;

#[derive(Debug, Parser)]
#[command(name = "ringvault-server", version, about = "Ring-gated object storage service")]
struct Args {
    /// TOML configuration file. RINGVAULT_* environment variables override it.
    #[arg(long, env = "RINGVAULT_SERVER_CONFIG")]
    config: Option<PathBuf>,
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        () = ctrl_c => {}
        () = term => {}
    }
    tracing::info!("shutting down");
}

#[tokio::main]
async fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .init();
    let args = Args::parse();
    let config = match ServerConfig::load(args.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("ringvault-server: {e}");
            return ExitCode::from(2);
        }
    };
    let listen = config.listen;
    let service = match Service::open(config) {
        Ok(s) => Arc::new(s),
        Err(e) => {
            eprintln!("ringvault-server: {e}");
            return ExitCode::from(1);
        }
    };
    match serve(service, listen, shutdown_signal()).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ringvault-server: {e}");
            ExitCode::from(1)
        }
    }
}

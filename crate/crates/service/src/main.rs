use std::net::SocketAddr;

use inscribe_service::{app, ServiceConfig};

const DEFAULT_PORT: u16 = 8080;

async fn shutdown_signal() {
    if let Err(e) = tokio::signal::ctrl_c().await {
        log::error!("cannot listen for shutdown signal: {e}");
        std::future::pending::<()>().await;
    }
    log::info!("shutting down");
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let port = match std::env::var("INSCRIBE_PORT") {
        Ok(v) => v.trim().parse().map_err(|_| {
            std::io::Error::new(std::io::ErrorKind::InvalidInput, format!("INSCRIBE_PORT={v:?} is not a port"))
        })?,
        Err(_) => DEFAULT_PORT,
    };
    let config = ServiceConfig::from_env();
    log::info!(
        "deadline {:?}, {} concurrent jobs, solver threads {:?}",
        config.deadline,
        config.max_jobs,
        config.solver_threads
    );
    let addr = SocketAddr::from(([0, 0, 0, 0], port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {addr}");
    axum::serve(listener, app(config)).with_graceful_shutdown(shutdown_signal()).await
}

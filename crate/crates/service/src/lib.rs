//! HTTP service exposing datasets, trained artifacts, projections, selections,
//! graphlet rankings, fidelity data, and graph layouts.

pub mod api;
pub mod config;
pub mod error;
pub mod state;

use std::sync::Arc;

pub use api::router;
pub use config::ServiceConfig;
pub use state::AppState;

/// Binds the configured address and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> graphlet_lens::Result<()> {
    let addr = format!("{}:{}", config.host, config.port);
    let state = Arc::new(AppState::open(config)?);
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .map_err(|e| graphlet_lens::Error::Config(format!("cannot bind {addr}: {e}")))?;
    eprintln!("listening on http://{addr}");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| graphlet_lens::Error::io(&addr, e))
}

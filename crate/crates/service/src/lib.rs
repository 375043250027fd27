//! HTTP service through which coders work a filtered corpus.
//!
//! Corpora and filtered sets are uploaded once; sessions turn a filtered set
//! into per-coder queues of items, one per retained segment. Submitted
//! annotations are validated, appended to a durable log, and can be exported
//! raw or after adjudication. See [`http::router`] for the routes.

pub mod clock;
pub mod error;
pub mod http;
pub mod log;
pub mod service;
pub mod state;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

pub use clock::{Clock, ManualClock, SystemClock};
pub use error::ServiceError;
pub use http::{router, AppState, TOKEN_HEADER};
pub use service::CodingService;

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub data_dir: PathBuf,
    pub addr: SocketAddr,
    pub lease_ms: u64,
    pub snapshot_every: u64,
    pub token: Option<String>,
    pub ui_dir: Option<PathBuf>,
}

impl ServeConfig {
    pub fn new(data_dir: PathBuf, addr: SocketAddr) -> Self {
        ServeConfig {
            data_dir,
            addr,
            lease_ms: service::DEFAULT_LEASE_MS,
            snapshot_every: 100,
            token: None,
            ui_dir: None,
        }
    }
}

pub fn app_state(service: CodingService, token: Option<String>) -> AppState {
    AppState {
        service: Arc::new(tokio::sync::Mutex::new(service)),
        token: token.map(Into::into),
    }
}

/// Opens the store, binds, and serves until the process is stopped.
/// `on_bound` receives the bound address (useful with port 0).
pub async fn serve(config: ServeConfig, on_bound: impl FnOnce(SocketAddr)) -> Result<(), ServiceError> {
    let service = CodingService::open(&config.data_dir, Arc::new(SystemClock), config.lease_ms, config.snapshot_every)?;
    let recovery = service.recovery().clone();
    tracing::info!(
        snapshot = recovery.snapshot_seq,
        replayed = recovery.replayed,
        torn = recovery.torn_tail_bytes,
        "store opened"
    );
    let app = router(app_state(service, config.token), config.ui_dir);
    let listener = tokio::net::TcpListener::bind(config.addr).await?;
    on_bound(listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

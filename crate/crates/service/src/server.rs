use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;

use ats_core::{Engine, FeedbackCatalog, FileStore, MemoryStore, Store, ThresholdConfig};
use tokio::sync::oneshot;

use crate::api::{router, AppState};
use crate::config::ServiceConfig;

/// Opens the store and loads thresholds and catalog named by `cfg`.
pub fn build_state(cfg: &ServiceConfig) -> ats_core::Result<AppState> {
    cfg.validate()?;
    let store: Arc<dyn Store> = match &cfg.storage_path {
        Some(path) => Arc::new(FileStore::open(path)?),
        None => Arc::new(MemoryStore::new()),
    };
    let thresholds = match &cfg.threshold_path {
        Some(path) => ThresholdConfig::load(path)?,
        None => ThresholdConfig::default(),
    };
    let catalog = match &cfg.catalog_path {
        Some(path) => FeedbackCatalog::load(path)?,
        None => FeedbackCatalog::default(),
    };
    let engine = Engine::open(store, thresholds, catalog)?.with_mode(cfg.analyzer_mode);
    AppState::new(Arc::new(engine), &cfg.admin_token, cfg.workers)
}

/// Serves until ctrl-c.
pub async fn serve(cfg: &ServiceConfig) -> std::io::Result<()> {
    let state = build_state(cfg).map_err(std::io::Error::other)?;
    let listener = tokio::net::TcpListener::bind(&cfg.bind_address).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

/// A server running on its own thread and runtime, stopped on drop.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<std::io::Result<()>>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn shutdown(mut self) -> std::io::Result<()> {
        self.stop_and_join()
    }

    fn stop_and_join(&mut self) -> std::io::Result<()> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        match self.thread.take() {
            Some(t) => t
                .join()
                .map_err(|_| std::io::Error::other("server thread panicked"))?,
            None => Ok(()),
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        let _ = self.stop_and_join();
    }
}

/// Starts serving `state` on `bind` (use port 0 for an ephemeral port).
pub fn spawn_server(state: AppState, bind: &str) -> std::io::Result<ServerHandle> {
    let std_listener = std::net::TcpListener::bind(bind)?;
    std_listener.set_nonblocking(true)?;
    let addr = std_listener.local_addr()?;
    let (stop, stopped) = oneshot::channel::<()>();
    let thread = std::thread::Builder::new()
        .name("ats-server".into())
        .spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread()
                .enable_all()
                .build()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(std_listener)?;
                axum::serve(listener, router(state))
                    .with_graceful_shutdown(async {
                        let _ = stopped.await;
                    })
                    .await
            })
        })?;
    Ok(ServerHandle {
        addr,
        stop: Some(stop),
        thread: Some(thread),
    })
}

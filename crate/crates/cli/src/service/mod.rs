//! HTTP + WebSocket front end over one drone link, its frame feed and the
//! snapshot store.

mod api;
mod error;
mod executor;
mod stream;

use std::future::Future;
use std::net::{Ipv4Addr, SocketAddr, SocketAddrV4, UdpSocket};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use anyhow::Context;
use axum::routing::{get, post};
use axum::Router;
use gcs_core::link::{LinkEndpoint, DEFAULT_DRONE_ADDR, DEFAULT_LOCAL_BIND, DEFAULT_REPLY_TIMEOUT};
use gcs_core::mission::MissionOptions;
use gcs_core::sim::{serve_endpoint, SimConfig, SimDroneState, SimHandle, DEFAULT_FRAME_PORT};
use gcs_core::store::{Frame, FrameBuffer, FrameReceiver, SnapshotStore};
use log::info;
use serde::Serialize;
use tokio::sync::{oneshot, watch};

pub use api::{CommandReply, ConnectInfo, FrameStats, ProcessResponse, StateView, StepHistogram};
pub use error::{ApiError, ErrorCode};
pub use stream::{FrameHeader, Telemetry};

use executor::Executor;

#[derive(Clone, Debug)]
pub struct ServiceConfig {
    pub drone_addr: SocketAddrV4,
    pub local_bind: SocketAddrV4,
    /// Start an in-process simulator on loopback and fly that instead.
    pub sim_mode: bool,
    pub http_bind: SocketAddr,
    pub data_dir: PathBuf,
    /// Simulator frame rate.
    pub fps: u32,
    pub reply_timeout: Duration,
    pub connect_retries: u32,
    /// Where frames are received when not in sim mode.
    pub frame_bind: SocketAddrV4,
    pub mission: MissionOptions,
    /// Scene, noise and faults for the embedded simulator.
    pub sim: SimConfig,
    pub telemetry_every: Duration,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            drone_addr: DEFAULT_DRONE_ADDR,
            local_bind: DEFAULT_LOCAL_BIND,
            sim_mode: false,
            http_bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            data_dir: PathBuf::from("data"),
            fps: 5,
            reply_timeout: DEFAULT_REPLY_TIMEOUT,
            connect_retries: 3,
            frame_bind: SocketAddrV4::new(Ipv4Addr::UNSPECIFIED, DEFAULT_FRAME_PORT),
            mission: MissionOptions::default(),
            sim: SimConfig::default(),
            telemetry_every: Duration::from_millis(500),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditEntry {
    pub at_ms: u64,
    pub action: String,
    pub outcome: String,
}

pub(crate) struct Inner {
    pub cfg: ServiceConfig,
    pub endpoint: LinkEndpoint,
    pub executor: Executor,
    pub frames: Arc<FrameBuffer>,
    pub store: Arc<SnapshotStore>,
    pub frame_feed: watch::Receiver<Option<Arc<Frame>>>,
    pub shutdown: watch::Receiver<bool>,
    pub sim: Option<SimHandle>,
    pub started: Instant,
    audit: Mutex<Vec<AuditEntry>>,
    _receiver: FrameReceiver,
}

pub(crate) type AppState = Arc<Inner>;

impl Inner {
    pub fn audit(&self, action: impl Into<String>, outcome: impl Into<String>) {
        let entry = AuditEntry {
            at_ms: self.started.elapsed().as_millis() as u64,
            action: action.into(),
            outcome: outcome.into(),
        };
        info!("{}: {}", entry.action, entry.outcome);
        self.audit.lock().unwrap().push(entry);
    }

    pub fn audit_log(&self) -> Vec<AuditEntry> {
        self.audit.lock().unwrap().clone()
    }

    /// Simulator truth in sim mode, otherwise the link's replayed view.
    pub fn drone_state(&self) -> SimDroneState {
        match &self.sim {
            Some(sim) => sim.state(),
            None => self.executor.status().shadow,
        }
    }
}

fn build_state(cfg: ServiceConfig, shutdown: watch::Receiver<bool>) -> anyhow::Result<AppState> {
    let store = SnapshotStore::open(&cfg.data_dir)
        .with_context(|| format!("opening data dir {}", cfg.data_dir.display()))?;
    let frames = Arc::new(FrameBuffer::new());
    let (feed_tx, feed_rx) = watch::channel(None);
    let frame_bind = if cfg.sim_mode {
        SocketAddrV4::new(Ipv4Addr::LOCALHOST, 0)
    } else {
        cfg.frame_bind
    };
    let socket = UdpSocket::bind(frame_bind).with_context(|| format!("binding frame port {frame_bind}"))?;
    let receiver = FrameReceiver::spawn(socket, frames.clone(), move |f| {
        feed_tx.send_replace(Some(f.clone()));
    })?;

    let mut endpoint = LinkEndpoint {
        drone_addr: cfg.drone_addr,
        local_bind: cfg.local_bind,
        reply_timeout: cfg.reply_timeout,
        max_retries: cfg.connect_retries,
    };
    let sim = if cfg.sim_mode {
        let sim = serve_endpoint(SimConfig {
            bind: SocketAddrV4::new(Ipv4Addr::LOCALHOST, 0),
            fps: cfg.fps,
            frame_dest: Some(receiver.local_addr()),
            ..cfg.sim.clone()
        })?;
        endpoint.drone_addr = sim.drone_addr();
        endpoint.local_bind = SocketAddrV4::new(Ipv4Addr::LOCALHOST, 0);
        info!("embedded simulator at {}", sim.local_addr());
        Some(sim)
    } else {
        None
    };
    endpoint.validate()?;

    Ok(Arc::new(Inner {
        cfg,
        endpoint,
        executor: Executor::spawn()?,
        frames,
        store: Arc::new(store),
        frame_feed: feed_rx,
        shutdown,
        sim,
        started: Instant::now(),
        audit: Mutex::new(Vec::new()),
        _receiver: receiver,
    }))
}

fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(api::health))
        .route("/state", get(api::state))
        .route("/events", get(api::events))
        .route("/connect", post(api::connect))
        .route("/command", post(api::command))
        .route("/mission/square", post(api::mission_square))
        .route("/mission/script", post(api::mission_script))
        .route("/snap", post(api::snap))
        .route("/snapshots", get(api::list_snapshots))
        .route("/snapshots/{id}", get(api::snapshot_ppm))
        .route("/snapshots/{id}/meta", get(api::snapshot_meta))
        .route("/process", post(api::process))
        .route("/stream", get(stream::stream))
        .fallback(api::fallback)
        .with_state(state)
}

/// Serves until `until` resolves.
pub async fn serve(cfg: ServiceConfig, until: impl Future<Output = ()> + Send + 'static) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(cfg.http_bind)
        .await
        .with_context(|| format!("binding {}", cfg.http_bind))?;
    run(cfg, listener, until).await
}

async fn run(
    cfg: ServiceConfig,
    listener: tokio::net::TcpListener,
    until: impl Future<Output = ()> + Send + 'static,
) -> anyhow::Result<()> {
    let (stop_tx, stop_rx) = watch::channel(false);
    let state = build_state(cfg, stop_rx)?;
    info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async move {
            until.await;
            let _ = stop_tx.send(true);
        })
        .await?;
    Ok(())
}

/// A service running on its own runtime thread; stops when dropped.
pub struct Service {
    addr: SocketAddr,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<anyhow::Result<()>>>,
}

impl Service {
    pub fn start(cfg: ServiceConfig) -> anyhow::Result<Self> {
        let std_listener = std::net::TcpListener::bind(cfg.http_bind)
            .with_context(|| format!("binding {}", cfg.http_bind))?;
        std_listener.set_nonblocking(true)?;
        let addr = std_listener.local_addr()?;
        let (stop_tx, stop_rx) = oneshot::channel::<()>();
        let (ready_tx, ready_rx) = std::sync::mpsc::channel::<anyhow::Result<()>>();
        let thread = std::thread::Builder::new().name("gcs-http".into()).spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(std_listener)?;
                let (flag_tx, flag_rx) = watch::channel(false);
                let state = match build_state(cfg, flag_rx) {
                    Ok(s) => {
                        let _ = ready_tx.send(Ok(()));
                        s
                    }
                    Err(e) => {
                        let _ = ready_tx.send(Err(anyhow::anyhow!("{e:#}")));
                        return Err(e);
                    }
                };
                axum::serve(listener, router(state))
                    .with_graceful_shutdown(async move {
                        let _ = stop_rx.await;
                        let _ = flag_tx.send(true);
                    })
                    .await?;
                Ok(())
            })
        })?;
        ready_rx.recv().context("service thread died during startup")??;
        Ok(Self {
            addr,
            stop: Some(stop_tx),
            thread: Some(thread),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn stop(mut self) -> anyhow::Result<()> {
        self.halt()
    }

    fn halt(&mut self) -> anyhow::Result<()> {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
        }
        match self.thread.take() {
            Some(t) => t.join().map_err(|_| anyhow::anyhow!("service thread panicked"))?,
            None => Ok(()),
        }
    }
}

impl Drop for Service {
    fn drop(&mut self) {
        let _ = self.halt();
    }
}

//! `vtms serve`: the live simulation behind a small HTTP API.
//!
//! A dedicated thread owns the [`LiveSim`] and paces it against the wall
//! clock. Handlers reach it only through a request queue; snapshots come
//! back on a watch channel, so readers never see a half-applied tick.

use std::convert::Infallible;
use std::future::Future;
use std::io;
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::PathBuf;
use std::sync::mpsc::{self, RecvTimeoutError};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::{Stream, StreamExt};
use serde::Deserialize;
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::sync::{oneshot, watch};
use vtms_core::harness::{trace_to_string, HarnessError, Scenario};
use vtms_core::live::{
    default_scenario, Ack, Command, CommandMessage, LiveSim, Pacer, Snapshot, DEFAULT_TIME_SCALE,
};

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_STREAM_HZ: f64 = 10.0;

// Upper bound on ticks run between two looks at the request queue.
const MAX_TICK_BATCH: u64 = 2_000;
const IDLE_WAIT: Duration = Duration::from_millis(50);

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub host: IpAddr,
    pub port: u16,
    pub scenario: Scenario,
    pub state_file: Option<PathBuf>,
    pub time_scale: f64,
    pub stream_hz: f64,
}

impl Default for ServeConfig {
    fn default() -> Self {
        Self {
            host: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: DEFAULT_PORT,
            scenario: default_scenario(),
            state_file: None,
            time_scale: DEFAULT_TIME_SCALE,
            stream_hz: DEFAULT_STREAM_HZ,
        }
    }
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot listen on {addr}: {source}")]
    Bind { addr: SocketAddr, source: io::Error },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("server: {0}")]
    Io(#[from] io::Error),
}

enum Request {
    Command(Command, oneshot::Sender<Ack>),
    Trace {
        from_s: Option<f64>,
        to_s: Option<f64>,
        reply: oneshot::Sender<String>,
    },
    Shutdown,
}

#[derive(Clone)]
struct AppState {
    requests: mpsc::Sender<Request>,
    snapshots: watch::Receiver<Snapshot>,
    shutdown: watch::Receiver<bool>,
    stream_period: Duration,
}

/// A bound, not yet serving, live service.
pub struct Server {
    listener: TcpListener,
    router: Router,
    requests: mpsc::Sender<Request>,
    shutdown: Arc<watch::Sender<bool>>,
    sim: thread::JoinHandle<Result<(), HarnessError>>,
}

impl Server {
    /// Builds the simulation and binds the port. Fails if the port is busy
    /// or the scenario does not validate.
    pub async fn bind(config: ServeConfig) -> Result<Self, ServeError> {
        if !(config.time_scale.is_finite() && config.time_scale > 0.0) {
            return Err(ServeError::Config("time scale must be > 0".into()));
        }
        if !(config.stream_hz.is_finite() && config.stream_hz > 0.0) {
            return Err(ServeError::Config("stream rate must be > 0".into()));
        }
        let live = LiveSim::new(
            &config.scenario,
            config.state_file.clone(),
            config.time_scale,
        )?;

        let addr = SocketAddr::new(config.host, config.port);
        let listener = TcpListener::bind(addr)
            .await
            .map_err(|source| ServeError::Bind { addr, source })?;

        let (request_tx, request_rx) = mpsc::channel();
        let (snapshot_tx, snapshot_rx) = watch::channel(live.snapshot());
        let (shutdown_tx, shutdown_rx) = watch::channel(false);
        let shutdown = Arc::new(shutdown_tx);
        let sim = {
            let shutdown = Arc::clone(&shutdown);
            thread::Builder::new()
                .name("vtms-sim".into())
                .spawn(move || sim_loop(live, request_rx, snapshot_tx, shutdown))?
        };

        let state = AppState {
            requests: request_tx.clone(),
            snapshots: snapshot_rx,
            shutdown: shutdown_rx,
            stream_period: Duration::from_secs_f64(1.0 / config.stream_hz),
        };
        let router = Router::new()
            .route("/api/snapshot", get(get_snapshot))
            .route("/api/command", post(post_command))
            .route("/api/stream", get(get_stream))
            .route("/api/trace", get(get_trace))
            .with_state(state);
        Ok(Self {
            listener,
            router,
            requests: request_tx,
            shutdown,
            sim,
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Serves until `stop` resolves or the simulation fails, then saves the
    /// counters and returns.
    pub async fn run<F>(self, stop: F) -> Result<(), ServeError>
    where
        F: Future<Output = ()> + Send + 'static,
    {
        let Server {
            listener,
            router,
            requests,
            shutdown,
            sim,
        } = self;
        let mut sim_down = shutdown.subscribe();
        let trigger = Arc::clone(&shutdown);
        let graceful = async move {
            tokio::select! {
                _ = stop => {}
                _ = sim_down.wait_for(|down| *down) => {}
            }
            // ends open event streams so graceful shutdown can finish
            trigger.send_replace(true);
        };
        let served = axum::serve(listener, router)
            .with_graceful_shutdown(graceful)
            .await;

        let _ = requests.send(Request::Shutdown);
        let outcome = tokio::task::spawn_blocking(move || sim.join())
            .await
            .map_err(io::Error::other)?;
        match outcome {
            Ok(result) => result?,
            Err(_) => return Err(ServeError::Config("simulation thread panicked".into())),
        }
        served?;
        Ok(())
    }
}

fn sim_loop(
    mut live: LiveSim,
    requests: mpsc::Receiver<Request>,
    snapshots: watch::Sender<Snapshot>,
    shutdown: Arc<watch::Sender<bool>>,
) -> Result<(), HarnessError> {
    let clock = Instant::now();
    let tick_ms = live.tick_ms();
    let mut pacer = Pacer::new(clock.elapsed(), live.t_ms(), live.time_scale());

    let result = 'outer: loop {
        let wait = if live.is_paused() {
            IDLE_WAIT
        } else {
            let next = pacer.wall_deadline(live.t_ms() + u64::from(tick_ms));
            next.saturating_sub(clock.elapsed()).min(IDLE_WAIT)
        };

        let mut pending = match requests.recv_timeout(wait) {
            Ok(request) => Some(request),
            Err(RecvTimeoutError::Timeout) => None,
            Err(RecvTimeoutError::Disconnected) => break Ok(()),
        };
        while let Some(request) = pending.take() {
            match request {
                Request::Shutdown => break 'outer Ok(()),
                Request::Command(command, reply) => {
                    let was_paused = live.is_paused();
                    let ack = live.apply_command(&command);
                    if matches!(command, Command::SetTimeScale(_))
                        || (was_paused && !live.is_paused())
                    {
                        pacer.rebase(clock.elapsed(), live.t_ms(), live.time_scale());
                    }
                    snapshots.send_replace(live.snapshot());
                    let _ = reply.send(ack);
                }
                Request::Trace {
                    from_s,
                    to_s,
                    reply,
                } => {
                    let rows = live.trace_slice(from_s, to_s);
                    let _ = reply.send(trace_to_string(&rows));
                }
            }
            pending = requests.try_recv().ok();
        }

        if live.is_paused() {
            continue;
        }
        let due = pacer
            .ticks_due(clock.elapsed(), live.t_ms(), tick_ms)
            .min(MAX_TICK_BATCH);
        for _ in 0..due {
            if let Err(e) = live.tick() {
                log::error!("simulation stopped: {e}");
                break 'outer Err(e);
            }
        }
        if due > 0 {
            snapshots.send_replace(live.snapshot());
        }
    };
    live.flush();
    shutdown.send_replace(true);
    result
}

async fn get_snapshot(State(state): State<AppState>) -> Json<Snapshot> {
    Json(state.snapshots.borrow().clone())
}

fn reject(status: StatusCode, detail: impl Into<String>) -> Response {
    (status, Json(Ack::rejected(detail))).into_response()
}

async fn post_command(State(state): State<AppState>, body: Bytes) -> Response {
    let message: CommandMessage = match serde_json::from_slice(&body) {
        Ok(m) => m,
        Err(e) => return reject(StatusCode::BAD_REQUEST, format!("invalid command: {e}")),
    };
    let command = match Command::parse(&message) {
        Ok(c) => c,
        Err(e) => return reject(StatusCode::BAD_REQUEST, e.to_string()),
    };
    let (reply, ack) = oneshot::channel();
    if state
        .requests
        .send(Request::Command(command, reply))
        .is_err()
    {
        return reject(StatusCode::SERVICE_UNAVAILABLE, "simulation stopped");
    }
    match ack.await {
        Ok(ack) => Json(ack).into_response(),
        Err(_) => reject(StatusCode::SERVICE_UNAVAILABLE, "simulation stopped"),
    }
}

#[derive(Debug, Deserialize)]
struct StreamQuery {
    hz: Option<f64>,
}

async fn get_stream(
    State(state): State<AppState>,
    Query(query): Query<StreamQuery>,
) -> Result<Sse<impl Stream<Item = Result<Event, Infallible>>>, Response> {
    let period = match query.hz {
        None => state.stream_period,
        Some(hz) if hz.is_finite() && hz > 0.0 && hz <= 1000.0 => Duration::from_secs_f64(1.0 / hz),
        Some(hz) => {
            return Err(reject(
                StatusCode::BAD_REQUEST,
                format!("hz out of range: {hz}"),
            ))
        }
    };
    let mut ticker = tokio::time::interval(period);
    ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Skip);
    let snapshots = state.snapshots.clone();
    let frames =
        futures::stream::unfold((ticker, snapshots), |(mut ticker, snapshots)| async move {
            ticker.tick().await;
            let frame = snapshots.borrow().clone();
            let event = Event::default()
                .event("snapshot")
                .json_data(&frame)
                .unwrap_or_else(|e| Event::default().event("error").data(e.to_string()));
            Some((Ok(event), (ticker, snapshots)))
        });
    let mut shutdown = state.shutdown.clone();
    let stopped = async move {
        let _ = shutdown.wait_for(|down| *down).await;
    };
    Ok(Sse::new(frames.take_until(stopped)).keep_alive(KeepAlive::default()))
}

#[derive(Debug, Deserialize)]
struct TraceQuery {
    from_s: Option<f64>,
    to_s: Option<f64>,
}

async fn get_trace(State(state): State<AppState>, Query(query): Query<TraceQuery>) -> Response {
    let (reply, csv) = oneshot::channel();
    let request = Request::Trace {
        from_s: query.from_s,
        to_s: query.to_s,
        reply,
    };
    if state.requests.send(request).is_err() {
        return reject(StatusCode::SERVICE_UNAVAILABLE, "simulation stopped");
    }
    match csv.await {
        Ok(csv) => ([(header::CONTENT_TYPE, "text/csv")], csv).into_response(),
        Err(_) => reject(StatusCode::SERVICE_UNAVAILABLE, "simulation stopped"),
    }
}

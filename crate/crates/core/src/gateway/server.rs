//! WebSocket and HTTP transport around [`GatewayEngine`].
//!
//! A single task owns the engine. Connection handlers talk to it over an
//! mpsc queue and receive its output from one broadcast channel, filtering
//! by target. A handler that falls behind loses the oldest messages and
//! skips the same number of seq values, so the client can see the gap.

use std::net::SocketAddr;
use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::{SinkExt, StreamExt};
use serde::Deserialize;
use tokio::net::TcpListener;
use tokio::sync::{broadcast, mpsc, oneshot};
use tokio::time::Instant;

use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::session::SessionSnapshot;

use super::engine::{EngineConfig, GatewayEngine};
use super::protocol::{Body, ErrorCode, ErrorPayload, Outbound, Role, SeqCounter};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServeConfig {
    pub engine: EngineConfig,
    /// Wall-clock seconds per simulated second. Zero runs flat out.
    pub pacing: f64,
    /// Messages buffered per connection before the oldest are dropped.
    pub channel_capacity: usize,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig {
            engine: EngineConfig::default(),
            pacing: 1.0,
            channel_capacity: 1024,
        }
    }
}

enum Command {
    Connect {
        role: Role,
        reply: oneshot::Sender<std::result::Result<u64, Body>>,
    },
    Text {
        id: u64,
        text: String,
    },
    Disconnect {
        id: u64,
    },
    LoadScenario {
        scenario: Box<Scenario>,
        reply: oneshot::Sender<std::result::Result<(), ErrorPayload>>,
    },
    Log {
        reply: oneshot::Sender<Result<String>>,
    },
    Snapshot {
        reply: oneshot::Sender<SessionSnapshot>,
    },
}

#[derive(Clone)]
struct AppState {
    commands: mpsc::Sender<Command>,
    events: broadcast::Sender<Outbound>,
}

/// A gateway bound to a local address and running in the background.
pub struct Gateway {
    pub local_addr: SocketAddr,
    shutdown: Option<oneshot::Sender<()>>,
    task: tokio::task::JoinHandle<()>,
}

impl Gateway {
    pub async fn shutdown(mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        let _ = self.task.await;
    }
}

/// Binds and starts serving; returns once the socket is listening.
pub async fn spawn(scenario: Scenario, bind: &str, config: ServeConfig) -> Result<Gateway> {
    let engine = GatewayEngine::new(scenario, config.engine)?;
    let listener = TcpListener::bind(bind)
        .await
        .map_err(|e| Error::io(bind, e))?;
    let local_addr = listener.local_addr().map_err(|e| Error::io(bind, e))?;
    let (cmd_tx, cmd_rx) = mpsc::channel(256);
    let (ev_tx, _) = broadcast::channel(config.channel_capacity.max(1));
    let state = AppState {
        commands: cmd_tx,
        events: ev_tx.clone(),
    };
    tokio::spawn(run_engine(engine, cmd_rx, ev_tx, config.pacing));

    let app = Router::new()
        .route("/ws", get(ws_handler))
        .route("/scenario", post(post_scenario))
        .route("/log", get(get_log))
        .route("/snapshot", get(get_snapshot))
        .with_state(state);

    let (stop_tx, stop_rx) = oneshot::channel::<()>();
    let task = tokio::spawn(async move {
        let _ = axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = stop_rx.await;
            })
            .await;
    });
    Ok(Gateway {
        local_addr,
        shutdown: Some(stop_tx),
        task,
    })
}

/// Serves until Ctrl-C.
pub async fn serve(scenario: Scenario, bind: &str, config: ServeConfig) -> Result<()> {
    let gateway = spawn(scenario, bind, config).await?;
    eprintln!("gateway listening on ws://{}/ws", gateway.local_addr);
    let _ = tokio::signal::ctrl_c().await;
    gateway.shutdown().await;
    Ok(())
}

async fn run_engine(
    mut engine: GatewayEngine,
    mut commands: mpsc::Receiver<Command>,
    events: broadcast::Sender<Outbound>,
    pacing: f64,
) {
    let publish = |out: Vec<Outbound>| {
        for o in out {
            // No receivers is fine; nobody is listening yet.
            let _ = events.send(o);
        }
    };
    let step_wall =
        |e: &GatewayEngine| Duration::from_secs_f64(e.session().scenario().dt * pacing.max(0.0));
    let mut next_step = Instant::now();

    loop {
        let cmd = if engine.is_running() {
            tokio::select! {
                biased;
                cmd = commands.recv() => match cmd {
                    Some(c) => Some(c),
                    None => return,
                },
                _ = tokio::time::sleep_until(next_step) => None,
            }
        } else {
            match commands.recv().await {
                Some(c) => Some(c),
                None => return,
            }
        };

        match cmd {
            None => {
                publish(engine.tick());
                let wall = step_wall(&engine);
                next_step += wall;
                if wall.is_zero() {
                    // Let connection handlers drain between steps.
                    tokio::task::yield_now().await;
                }
            }
            Some(Command::Connect { role, reply }) => match engine.connect(role) {
                Ok((id, out)) => {
                    let _ = reply.send(Ok(id));
                    publish(out);
                }
                Err(body) => {
                    let _ = reply.send(Err(body));
                }
            },
            Some(Command::Text { id, text }) => {
                let was_running = engine.is_running();
                publish(engine.handle_text(id, &text));
                if !was_running && engine.is_running() {
                    next_step = Instant::now() + step_wall(&engine);
                }
            }
            Some(Command::Disconnect { id }) => engine.disconnect(id),
            Some(Command::LoadScenario { scenario, reply }) => match engine.load_scenario(*scenario) {
                Ok(out) => {
                    let _ = reply.send(Ok(()));
                    publish(out);
                }
                Err(e) => {
                    let code = match e {
                        Error::NotPaused => ErrorCode::NotPaused,
                        _ => ErrorCode::ScenarioInvalid,
                    };
                    let _ = reply.send(Err(ErrorPayload {
                        code,
                        message: e.to_string(),
                    }));
                }
            },
            Some(Command::Log { reply }) => {
                let _ = reply.send(engine.log_ndjson());
            }
            Some(Command::Snapshot { reply }) => {
                let _ = reply.send(engine.snapshot());
            }
        }
    }
}

#[derive(Deserialize)]
struct WsQuery {
    role: Option<Role>,
}

async fn ws_handler(
    ws: WebSocketUpgrade,
    Query(q): Query<WsQuery>,
    State(state): State<AppState>,
) -> Response {
    let role = q.role.unwrap_or(Role::Observer);
    ws.on_upgrade(move |socket| connection(socket, role, state))
}

async fn connection(socket: WebSocket, role: Role, state: AppState) {
    let (mut sink, mut stream) = socket.split();
    let mut seq = SeqCounter::default();
    // Subscribe before registering so the hello cannot be missed.
    let mut events = state.events.subscribe();
    let (reply_tx, reply_rx) = oneshot::channel();
    if state
        .commands
        .send(Command::Connect { role, reply: reply_tx })
        .await
        .is_err()
    {
        return;
    }
    let id = match reply_rx.await {
        Ok(Ok(id)) => id,
        Ok(Err(body)) => {
            let msg = seq.stamp(&Outbound::all(body));
            let _ = sink.send(Message::Text(msg.encode())).await;
            let _ = sink.close().await;
            return;
        }
        Err(_) => return,
    };

    let mut greeted = false;
    loop {
        tokio::select! {
            ev = events.recv() => match ev {
                Ok(out) => {
                    if !out.is_for(id) {
                        continue;
                    }
                    // Broadcasts queued before our hello belong to the past.
                    if !greeted {
                        if !matches!(out.body, Body::Hello(_)) {
                            continue;
                        }
                        greeted = true;
                    }
                    let msg = seq.stamp(&out);
                    if sink.send(Message::Text(msg.encode())).await.is_err() {
                        break;
                    }
                }
                Err(broadcast::error::RecvError::Lagged(n)) => seq.skip(n),
                Err(broadcast::error::RecvError::Closed) => break,
            },
            frame = stream.next() => match frame {
                Some(Ok(Message::Text(text))) => {
                    if state.commands.send(Command::Text { id, text }).await.is_err() {
                        break;
                    }
                }
                Some(Ok(Message::Binary(_))) => {
                    let out = Outbound::to(id, Body::error(ErrorCode::Malformed, "binary frames are not supported"));
                    let msg = seq.stamp(&out);
                    if sink.send(Message::Text(msg.encode())).await.is_err() {
                        break;
                    }
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => break,
                Some(Ok(_)) => {}
            },
        }
    }
    let _ = state.commands.send(Command::Disconnect { id }).await;
}

fn error_response(status: StatusCode, payload: ErrorPayload) -> Response {
    (status, Json(payload)).into_response()
}

async fn post_scenario(State(state): State<AppState>, body: String) -> Response {
    let scenario = match Scenario::from_json(&body) {
        Ok(s) => s,
        Err(e) => {
            return error_response(
                StatusCode::BAD_REQUEST,
                ErrorPayload {
                    code: ErrorCode::ScenarioInvalid,
                    message: e.to_string(),
                },
            )
        }
    };
    let (tx, rx) = oneshot::channel();
    if state
        .commands
        .send(Command::LoadScenario {
            scenario: Box::new(scenario),
            reply: tx,
        })
        .await
        .is_err()
    {
        return StatusCode::SERVICE_UNAVAILABLE.into_response();
    }
    match rx.await {
        Ok(Ok(())) => StatusCode::NO_CONTENT.into_response(),
        Ok(Err(p)) if p.code == ErrorCode::NotPaused => error_response(StatusCode::CONFLICT, p),
        Ok(Err(p)) => error_response(StatusCode::BAD_REQUEST, p),
        Err(_) => StatusCode::SERVICE_UNAVAILABLE.into_response(),
    }
}

async fn get_log(State(state): State<AppState>) -> Response {
    let (tx, rx) = oneshot::channel();
    if state.commands.send(Command::Log { reply: tx }).await.is_err() {
        return StatusCode::SERVICE_UNAVAILABLE.into_response();
    }
    match rx.await {
        Ok(Ok(text)) => ([(header::CONTENT_TYPE, "application/x-ndjson")], text).into_response(),
        Ok(Err(e)) => (StatusCode::INTERNAL_SERVER_ERROR, e.to_string()).into_response(),
        Err(_) => StatusCode::SERVICE_UNAVAILABLE.into_response(),
    }
}

async fn get_snapshot(State(state): State<AppState>) -> Response {
    let (tx, rx) = oneshot::channel();
    if state.commands.send(Command::Snapshot { reply: tx }).await.is_err() {
        return StatusCode::SERVICE_UNAVAILABLE.into_response();
    }
    match rx.await {
        Ok(snap) => Json(snap).into_response(),
        Err(_) => StatusCode::SERVICE_UNAVAILABLE.into_response(),
    }
}

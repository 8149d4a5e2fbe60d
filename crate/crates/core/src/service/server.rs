use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::get;
use axum::Router;
use tokio::net::TcpListener;
use tokio::sync::mpsc;
use tower_http::services::ServeDir;

use super::protocol::ServerMessage;
use super::session::{Engine, FrameDone, Output, Session};

#[derive(Debug, Clone)]
pub struct ServiceOptions {
    pub max_in_flight: usize,
    /// Directory of static assets served at `/`.
    pub web_root: Option<PathBuf>,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        Self {
            max_in_flight: 1,
            web_root: None,
        }
    }
}

#[derive(Clone)]
struct AppState {
    engine: Arc<Engine>,
    max_in_flight: usize,
    next_session: Arc<AtomicU64>,
}

/// Routes: `/ws` (protocol), `/healthz`, and static files when configured.
pub fn router(engine: Arc<Engine>, options: &ServiceOptions) -> Router {
    let state = AppState {
        engine,
        max_in_flight: options.max_in_flight,
        next_session: Arc::new(AtomicU64::new(1)),
    };
    let app = Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/ws", get(upgrade))
        .with_state(state);
    match &options.web_root {
        Some(root) => app.fallback_service(ServeDir::new(root)),
        None => app,
    }
}

/// Serves until Ctrl-C.
pub async fn serve(
    listener: TcpListener,
    engine: Arc<Engine>,
    options: &ServiceOptions,
) -> std::io::Result<()> {
    axum::serve(listener, router(engine, options))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn upgrade(ws: WebSocketUpgrade, State(state): State<AppState>) -> impl IntoResponse {
    let id = state.next_session.fetch_add(1, Ordering::Relaxed);
    let session = Session::new(id, state.engine, state.max_in_flight);
    ws.on_upgrade(move |socket| run_session(socket, session))
}

enum Event {
    Incoming(Option<Result<Message, axum::Error>>),
    Done(FrameDone),
}

async fn run_session(mut socket: WebSocket, mut session: Session) {
    tracing::info!(session = session.id(), "session opened");
    let (tx, mut rx) = mpsc::unbounded_channel::<FrameDone>();
    loop {
        let event = tokio::select! {
            m = socket.recv() => Event::Incoming(m),
            Some(done) = rx.recv() => Event::Done(done),
        };
        let outputs = match event {
            Event::Done(done) => session.complete(done),
            Event::Incoming(Some(Ok(Message::Text(text)))) => session.handle_text(text.as_str()),
            Event::Incoming(Some(Ok(Message::Binary(_)))) => vec![Output::Send(ServerMessage::Error {
                reason: "binary messages are not supported".into(),
            })],
            Event::Incoming(Some(Ok(Message::Ping(_) | Message::Pong(_)))) => continue,
            Event::Incoming(_) => break,
        };
        for output in outputs {
            match output {
                Output::Send(msg) => {
                    if socket.send(Message::Text(msg.to_json().into())).await.is_err() {
                        return;
                    }
                }
                Output::Run(job) => {
                    let tx = tx.clone();
                    tokio::task::spawn_blocking(move || {
                        let _ = tx.send(job.run());
                    });
                }
            }
        }
    }
    let c = session.counters();
    tracing::info!(
        session = session.id(),
        admitted = c.admitted,
        dropped = c.dropped,
        errors = session.errors(),
        "session closed"
    );
}

use std::time::Duration;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use gcs_core::sim::{FlightPhase, Position};
use gcs_core::store::encode_record;
use log::debug;
use serde::{Deserialize, Serialize};

use super::AppState;

/// JSON text message interleaved with binary frame records on `/stream`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename = "telemetry")]
pub struct Telemetry {
    pub connected: bool,
    pub phase: FlightPhase,
    pub position: Position,
    pub heading: u16,
    pub altitude: u32,
    pub battery: u8,
    pub streaming: bool,
    /// Sequence number of the newest ingested frame.
    pub frame_seq: Option<u64>,
}

/// Text message sent immediately before each binary frame record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename = "frame")]
pub struct FrameHeader {
    pub seq: u64,
    pub width: usize,
    pub height: usize,
}

fn telemetry(st: &AppState) -> Telemetry {
    let d = st.drone_state();
    Telemetry {
        connected: st.executor.status().connected,
        phase: d.phase,
        position: d.position,
        heading: d.heading,
        altitude: d.altitude,
        battery: d.battery,
        streaming: d.streaming,
        frame_seq: st.frames.latest().map(|f| f.seq),
    }
}

pub async fn stream(ws: WebSocketUpgrade, State(st): State<AppState>) -> Response {
    ws.on_upgrade(move |socket| pump(socket, st))
}

async fn send_telemetry(socket: &mut WebSocket, st: &AppState) -> bool {
    let text = serde_json::to_string(&telemetry(st)).expect("telemetry serializes");
    socket.send(Message::Text(text.into())).await.is_ok()
}

/// Latest-wins delivery: a client that falls behind skips straight to the
/// newest frame and never slows ingest down.
async fn pump(mut socket: WebSocket, st: AppState) {
    let mut feed = st.frame_feed.clone();
    let mut shutdown = st.shutdown.clone();
    let mut tick = tokio::time::interval(st.cfg.telemetry_every.max(Duration::from_millis(10)));
    feed.mark_changed();
    loop {
        tokio::select! {
            changed = feed.changed() => {
                if changed.is_err() {
                    break;
                }
                let frame = feed.borrow_and_update().clone();
                let Some(frame) = frame else { continue };
                let Ok(record) = encode_record(&frame.image) else { continue };
                let header = FrameHeader {
                    seq: frame.seq,
                    width: frame.image.width(),
                    height: frame.image.height(),
                };
                let header = serde_json::to_string(&header).expect("header serializes");
                if socket.send(Message::Text(header.into())).await.is_err()
                    || socket.send(Message::Binary(record.into())).await.is_err()
                {
                    break;
                }
            }
            _ = tick.tick() => {
                if !send_telemetry(&mut socket, &st).await {
                    break;
                }
            }
            msg = socket.recv() => match msg {
                None | Some(Err(_)) | Some(Ok(Message::Close(_))) => break,
                Some(Ok(_)) => {}
            },
            _ = shutdown.changed() => break,
        }
    }
    let _ = socket.send(Message::Close(None)).await;
    debug!("stream client left");
}
